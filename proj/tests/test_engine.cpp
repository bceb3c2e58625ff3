#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gridtwin/errors.hpp"
#include "support.hpp"

using namespace gridtwin;

namespace {

Scenario single_cell(long cycles) {
    Scenario s;
    s.name = "single";
    s.params = shipped();
    s.topology = cell_topology();
    s.protocol = cc_cycling(1.0);
    s.initial_soc = 0.0;
    s.converter = false;
    s.stop.cycles = cycles;
    return s;
}

Scenario series_pair() {
    Scenario s = single_cell(1);
    s.name = "pair";
    TopologySpec t;
    t.kind = TopologyKind::series;
    t.count = 2;
    t.child = {cell_topology()};
    s.topology = t;
    s.overrides = {{1, 0.8, 1.0, 1.0}};
    s.initial_soc = 0.8;
    ProtocolStep dis;
    dis.mode = StepMode::cc;
    dis.rate_c = 1.0;
    dis.duration_s = 1200.0;
    ProtocolStep rest;
    rest.duration_s = 600.0;
    s.protocol.steps = {dis, rest};
    s.protocol.repeat = 1;
    return s;
}

void check_rows_close(const Simulation& sim) {
    for (const MetricsRow& r : sim.rows()) {
        if (r.ledger.grid_in <= 0.0) continue;
        CHECK(std::abs(r.ledger.closure_error()) < 1e-4);
    }
}

bool same_rows(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].efficiency != b[i].efficiency || a[i].fec != b[i].fec || a[i].time_end != b[i].time_end) return false;
        if (a[i].capacity.mean != b[i].capacity.mean || a[i].t_max != b[i].t_max) return false;
        for (int k = 0; k < loss_item_count; ++k)
            if (a[i].ledger.losses[k] != b[i].ledger.losses[k]) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("sim_engine") {

TEST_CASE("every preset closes its ledger on a short run") {
    PresetOptions o;
    o.scale = "block";
    o.cycles = 1;
    o.days = 0.1;
    for (const std::string& name : preset_names()) {
        CAPTURE(name);
        std::vector<Scenario> variants = make_preset(name, o);
        REQUIRE(!variants.empty());
        Scenario s = variants.back();
        s.logging.capacity_every = 0;
        s.logging.capacity_at_start = false;
        Simulation sim(s);
        sim.run();
        CHECK(!sim.rows().empty());
        check_rows_close(sim);
        CHECK(std::abs(sim.totals().closure_residual()) <= 1e-4 * sim.totals().grid_in);
    }
}

TEST_CASE("full equivalent cycles count cell throughput over twice the rated charge") {
    Simulation sim(single_cell(2));
    sim.run();
    REQUIRE(sim.rows().size() == 2);
    double total = 0.0;
    for (const MetricsRow& r : sim.rows()) {
        CHECK(r.fec_increment == doctest::Approx(r.throughput_ah / (2.0 * shipped().cell.Q_nom)).epsilon(1e-12));
        CHECK(r.fec_increment > 0.9);
        CHECK(r.fec_increment < 1.05);
        total += r.fec_increment;
    }
    CHECK(sim.fec() == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("single-cell round trip loses energy") {
    Simulation sim(single_cell(2));
    sim.run();
    const MetricsRow& r = sim.rows().back();
    CHECK(r.efficiency < 1.0);
    CHECK(r.efficiency > 0.85);
    CHECK(r.ledger.item(LossItem::cell_ohmic) > 0.0);
    CHECK(r.ledger.item(LossItem::converter_cond) == 0.0);
    check_rows_close(sim);
}

TEST_CASE("a rest-only run exchanges no energy with the grid") {
    Scenario s = single_cell(-1);
    s.protocol = rest_protocol(3600.0);
    s.stop.time_s = 3600.0;
    Simulation sim(s);
    sim.run();
    CHECK(sim.time() == doctest::Approx(3600.0));
    CHECK(sim.totals().grid_in == 0.0);
    CHECK(sim.totals().grid_out == 0.0);
    CHECK(sim.fec() == 0.0);
    CHECK(sim.cells()[0]->cell.state().deg.lost_li > 0.0);
}

TEST_CASE("daily profile fills one day") {
    const Protocol p = daily_profile();
    double total = 0.0;
    for (const ProtocolStep& s : p.steps) total += s.duration_s;
    CHECK(total == doctest::Approx(86400.0).epsilon(1e-12));
}

TEST_CASE("CCCV charge of a full cell accepts almost nothing") {
    CellUnit u(make_cell(1.0));
    const CccvResult r = cccv_charge(u, 16.0, shipped().cell.V_max, 0.8, 2.0);
    CHECK(r.charge_ah < 0.01);
    CHECK_THROWS_AS(cccv_charge(u, -1.0, 4.2, 0.8, 2.0), DomainError);
}

TEST_CASE("capacity check does not disturb the cell and sees fade") {
    Cell fresh = make_cell(0.5);
    const double c0 = measure_cell_capacity(fresh, 10.0);
    CHECK(fresh.soc() == doctest::Approx(0.5).epsilon(1e-12));
    CellParams aged_p = shipped().cell;
    aged_p.eps_n0 *= 0.95;
    CHECK(measure_cell_capacity(make_cell(aged_p), 10.0) < c0);
}

TEST_CASE("mean capacity never rises during accelerated cycling") {
    Scenario s = single_cell(4);
    s.degradation_acceleration = 20.0;
    s.logging.capacity_every = 1;
    Simulation sim(s);
    sim.run();
    const auto& snaps = sim.capacity_snapshots();
    REQUIRE(snaps.size() >= 4);
    for (std::size_t i = 1; i < snaps.size(); ++i) CHECK(snaps[i].capacities[0] <= snaps[i - 1].capacities[0]);
}

TEST_CASE("balancing equalises rest voltages and books its energy") {
    Scenario s = series_pair();
    s.balancing.tolerance_v = 1e-3;
    Simulation even(s);
    CHECK(even.balance() == 0.0);

    Simulation sim(s);
    while (sim.advance() && sim.time() < 1800.0) {}
    const double before = sim.totals().item(LossItem::balancing);
    const double v_lo = std::min(sim.cells()[0]->cell.rest_voltage(), sim.cells()[1]->cell.rest_voltage());
    const double e0 = sim.totals().delta_stored;
    const double removed = sim.balance();
    CHECK(removed > 0.0);
    CHECK(sim.totals().item(LossItem::balancing) - before == doctest::Approx(removed).epsilon(1e-12));
    for (CellUnit* c : sim.cells()) CHECK(std::abs(c->cell.rest_voltage() - v_lo) < 2e-3);
    // Stored energy drops by the bled energy plus the bleed's own ohmic loss.
    CHECK(e0 - sim.totals().delta_stored > removed);
    CHECK(std::abs(sim.totals().closure_residual()) <= 1e-4 * std::max(sim.totals().grid_out, 1.0));
}

TEST_CASE("checkpoint round trip and continuation") {
    Scenario s = single_cell(3);
    s.degradation_acceleration = 10.0;
    s.logging.capacity_every = 1;
    Simulation straight(s);
    straight.run();

    Simulation first(s);
    while (first.completed_cycles() < 1) first.advance();
    for (int k = 0; k < 137; ++k) first.advance();
    const std::vector<std::uint8_t> bytes = first.checkpoint();

    Simulation resumed(s);
    resumed.restore(bytes);
    CHECK(resumed.checkpoint() == bytes);
    resumed.run();
    CHECK(same_rows(straight.rows(), resumed.rows()));

    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2));
    Simulation target(s);
    CHECK_THROWS_AS(target.restore(cut), CheckpointError);
    std::vector<std::uint8_t> flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x40;
    CHECK_THROWS_AS(target.restore(flipped), CheckpointError);
    Simulation other(series_pair());
    CHECK_THROWS_AS(other.restore(bytes), CheckpointError);
}

TEST_CASE("results do not depend on the thread count") {
    PresetOptions o;
    o.cycles = 1;
    Scenario s = make_preset("fig8", o).front();
    Simulation one(s, 1), four(s, 4);
    one.run();
    four.run();
    CHECK(same_rows(one.rows(), four.rows()));
    REQUIRE(one.temperature_log().size() == four.temperature_log().size());
    CHECK(one.temperature_log().back().T == four.temperature_log().back().T);
}

TEST_CASE("invalid scenarios are rejected") {
    Scenario s = single_cell(1);
    s.dt = 0.0;
    CHECK_THROWS_AS(Simulation{s}, ConfigError);
    CHECK_THROWS_AS(Simulation(single_cell(1), 0), ConfigError);
    Scenario empty = single_cell(1);
    empty.protocol.steps.clear();
    CHECK_THROWS_AS(Simulation{empty}, ConfigError);
}

} // TEST_SUITE
