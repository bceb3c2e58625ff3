// Acceptance run: one PASS/FAIL line per criterion. Criterion 10 is reported
// only. Arguments select criteria by number; none runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gridtwin/cell_model.hpp"
#include "gridtwin/engine.hpp"
#include "gridtwin/physics.hpp"
#include "gridtwin/presets.hpp"

using namespace gridtwin;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double max_closure = 0.0;

void track_closure(const Simulation& sim) {
    for (const MetricsRow& r : sim.rows())
        if (r.ledger.grid_in > 0.0) max_closure = std::max(max_closure, std::abs(r.ledger.closure_error()));
}

std::unique_ptr<Simulation> simulate(Scenario s, std::function<void(Simulation&, const StepInfo&)> obs = {}) {
    auto sim = std::make_unique<Simulation>(std::move(s), 1);
    sim->observer = std::move(obs);
    sim->run();
    track_closure(*sim);
    return sim;
}

Scenario variant(const std::vector<Scenario>& list, const std::string& name) {
    for (const Scenario& s : list)
        if (s.name == name) return s;
    throw std::runtime_error("missing variant " + name);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.size() < 2 ? 0.0 : std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Mean capacity in percent of Q_nom at every logged cycle.
std::map<long, double> capacity_track(const Simulation& sim) {
    std::map<long, double> out;
    const double q = sim.scenario().params.cell.Q_nom;
    for (const CapacitySnapshot& c : sim.capacity_snapshots()) out[c.cycle] = 100.0 * mean(c.capacities) / q;
    return out;
}

double track_gap(const std::map<long, double>& a, const std::map<long, double>& b) {
    double gap = 0.0;
    for (const auto& [cycle, v] : a)
        if (auto it = b.find(cycle); it != b.end()) gap = std::max(gap, std::abs(v - it->second));
    return gap;
}

// Energy-weighted round trip and usable energy over complete rows.
struct CycleEnergy {
    double efficiency = 0.0; // %
    double usable = 0.0;     // % of nominal
};

CycleEnergy cycle_energy(const Simulation& sim) {
    double in = 0.0, out = 0.0, usable = 0.0;
    int n = 0;
    for (const MetricsRow& r : sim.rows()) {
        if (!r.complete) continue;
        in += r.ledger.grid_in;
        out += r.ledger.grid_out;
        usable += r.usable_energy;
        ++n;
    }
    return {in > 0.0 ? 100.0 * out / in : 0.0, n ? 100.0 * usable / n : 0.0};
}

Verdict fig5() {
    const std::vector<Scenario> v = make_preset("fig5");
    Verdict out{true, ""};

    double worst_spread = 0.0;
    std::vector<double> charge(5, 0.0);
    simulate(v[0], [&](Simulation& s, const StepInfo& info) {
        double lo = 1e9, hi = -1e9;
        for (std::size_t i = 0; i < s.cells().size(); ++i) {
            const double V = s.cells()[i]->voltage();
            lo = std::min(lo, V);
            hi = std::max(hi, V);
            charge[i] += std::abs(s.cells()[i]->current()) * info.dt;
        }
        worst_spread = std::max(worst_spread, (hi - lo) / lo);
    });
    const double ratio = charge[4] / ((charge[0] + charge[1] + charge[2] + charge[3]) / 4.0);
    out.pass = worst_spread <= 1e-4 && ratio >= 0.35 && ratio <= 0.65;

    std::map<std::size_t, std::pair<double, double>> drops; // protocol step -> (min, max)
    bool first_max = false, seen_discharge = false;
    double last_step = -1;
    std::size_t segment = 0;
    simulate(v[1], [&](Simulation& s, const StepInfo& info) {
        Group* g = s.root().as_group();
        if (info.phase == 0) {
            if (static_cast<double>(info.step_index) != last_step) ++segment;
            last_step = static_cast<double>(info.step_index);
            const double drop = g->contact_r()[0] * std::abs(info.current);
            auto it = drops.try_emplace(segment, drop, drop).first;
            it->second.first = std::min(it->second.first, drop);
            it->second.second = std::max(it->second.second, drop);
        } else {
            last_step = -1;
        }
        if (!seen_discharge && info.current > 0.0) {
            seen_discharge = true;
            const std::vector<double>& c = g->child_currents();
            first_max = std::max_element(c.begin(), c.end()) == c.begin();
        }
    });
    double drop_var = 0.0;
    for (const auto& [k, mm] : drops) drop_var = std::max(drop_var, (mm.second - mm.first) / mm.second);
    out.pass = out.pass && drop_var <= 0.01 && first_max;
    out.detail = fmt("voltage spread %.2e, weak/other current %.3f, first-contact drop variation %.2e, first cell max %s",
                     worst_spread, ratio, drop_var, first_max ? "yes" : "no");
    return out;
}

Verdict fig8() {
    const Scenario s = make_preset("fig8").front();
    struct Sample {
        double t;
        std::vector<double> T;
    };
    std::vector<Sample> samples;
    const auto sim = simulate(s, [&](Simulation& x, const StepInfo&) {
        Sample f{x.time(), {}};
        for (CellUnit* c : x.cells()) f.T.push_back(c->cell.temperature());
        samples.push_back(std::move(f));
    });
    const std::vector<MetricsRow>& rows = sim->rows();
    if (rows.size() < 3) return {false, "fewer than three cycles completed"};

    auto window = [&](const MetricsRow& r) {
        std::vector<double> avg(5, 0.0);
        double lo = 1e9, hi = -1e9, n = 0.0;
        for (const Sample& x : samples) {
            if (x.t <= r.time_start || x.t > r.time_end) continue;
            const double m = mean(x.T);
            lo = std::min(lo, m);
            hi = std::max(hi, m);
            for (int i = 0; i < 5; ++i) avg[i] += x.T[i];
            n += 1.0;
        }
        for (double& a : avg) a /= n;
        return std::make_pair(avg, hi - lo);
    };
    const auto [last, range_last] = window(rows.back());
    const auto [prev, range_prev] = window(rows[rows.size() - 2]);
    bool bounded = true;
    const double T_env = s.thermal.env.T_inf;
    for (const Sample& x : samples)
        for (double T : x.T) bounded = bounded && std::isfinite(T) && T > T_env - 1.0 && T < T_env + 60.0;
    const bool weak_coolest = std::min_element(last.begin(), last.end()) - last.begin() == 4;
    const bool interior = last[2] > last[0] && last[3] > last[0];
    const double drift = std::abs(range_last - range_prev) / range_prev;
    Verdict v;
    v.pass = weak_coolest && interior && bounded && drift <= 0.2;
    v.detail = fmt("last-cycle means %.2f %.2f %.2f %.2f %.2f C, range %.3f vs %.3f K (drift %.1f%%)",
                   kelvin_to_celsius(last[0]), kelvin_to_celsius(last[1]), kelvin_to_celsius(last[2]),
                   kelvin_to_celsius(last[3]), kelvin_to_celsius(last[4]), range_last, range_prev, 100.0 * drift);
    return v;
}

Verdict ledger_all() {
    PresetOptions o;
    o.cycles = 2;
    o.days = 1.0;
    double worst = 0.0;
    int runs = 0;
    std::size_t rows = 0;
    for (const std::string& name : preset_names())
        for (Scenario s : make_preset(name, o)) {
            s.logging.capacity_every = 0;
            s.logging.capacity_at_start = false;
            const auto sim = simulate(s);
            for (const MetricsRow& r : sim->rows())
                if (r.ledger.grid_in > 0.0) {
                    worst = std::max(worst, std::abs(r.ledger.closure_error()));
                    ++rows;
                }
            ++runs;
        }
    return {worst < 1e-4 && rows > 0, fmt("%d runs, %zu rows, worst relative closure %.2e", runs, rows, worst)};
}

Verdict lithium() {
    double worst = 0.0;
    std::string detail;
    for (bool lam : {true, false}) {
        Scenario s;
        s.name = lam ? "lithium" : "lithium_no_lam";
        s.params = default_parameters();
        if (!lam) {
            s.params.cell.sei.beta_1 = 0.0;
            s.params.cell.stress.beta_2 = 0.0;
        }
        s.topology = cell_topology();
        s.converter = false;
        s.initial_soc = 0.0;
        s.protocol = cc_cycling(1.0);
        s.stop.cycles = 10;
        s.logging.capacity_at_start = false;
        const CellParams& p = s.params.cell;

        Simulation sim(s);
        const Cell& c = sim.cells()[0]->cell;
        auto inv_n = [&] { return electrode_inventory(c.state().c_n, c.state().deg.eps_n, p.A_n, p.tau_n, c.grid()); };
        auto inv_p = [&] { return electrode_inventory(c.state().c_p, c.state().deg.eps_p, p.A_p, p.tau_p, c.grid()); };
        const double n0 = inv_n(), p0 = inv_p(), lam0 = c.state().deg.lost_li_lam;
        double applied = 0.0, sei = 0.0;
        sim.observer = [&](Simulation& x, const StepInfo& info) {
            applied += info.current * info.dt;
            sei += x.cells()[0]->last.sei_charge;
        };
        sim.run();
        const double scale = p.Q_nom * 3600.0 / faraday;
        const double total = (inv_n() - n0) + (inv_p() - p0) + (c.state().deg.lost_li_lam - lam0) + sei / faraday;
        worst = std::max(worst, std::abs(total) / scale);
        if (!lam) {
            worst = std::max(worst, std::abs(inv_n() - n0 + (applied + sei) / faraday) / scale);
            worst = std::max(worst, std::abs(inv_p() - p0 - applied / faraday) / scale);
        }
        detail += fmt("%s%zu cycles, SEI %.3g C", detail.empty() ? "" : "; ", sim.rows().size(), sei);
    }
    return {worst < 1e-6, fmt("worst relative imbalance %.2e (%s)", worst, detail.c_str())};
}

Verdict contact_r() {
    const std::vector<Scenario> v = make_preset("contact_r");
    const auto one = simulate(variant(v, "contact_r_one_cell"));
    const auto nominal = simulate(variant(v, "contact_r_contact_r"));
    const auto high = simulate(variant(v, "contact_r_high_contact_r"));
    const double gap = track_gap(capacity_track(*one), capacity_track(*nominal));
    const CycleEnergy en = cycle_energy(*nominal), eh = cycle_energy(*high);
    const double d_eff = en.efficiency - eh.efficiency, d_use = en.usable - eh.usable;
    const long cycles = static_cast<long>(nominal->rows().size());
    return {gap <= 0.5 && d_eff >= 1.0 && d_use >= 2.0 && cycles >= 500,
            fmt("%ld cycles; single-cell vs nominal capacity gap %.3f pts; 10x contacts: efficiency -%.2f pts, "
                "usable energy -%.2f pts",
                cycles, gap, d_eff, d_use)};
}

Verdict cell2cell() {
    std::map<std::string, std::map<long, double>> tracks;
    std::map<std::string, double> final_sd;
    for (const Scenario& s : make_preset("cell2cell")) {
        const auto sim = simulate(s);
        tracks[s.name] = capacity_track(*sim);
        final_sd[s.name] = sd(sim->capacity_snapshots().back().capacities);
    }
    double gap = 0.0;
    for (const auto& [a, ta] : tracks)
        for (const auto& [b, tb] : tracks) gap = std::max(gap, track_gap(ta, tb));
    const double sd_deg = final_sd["cell2cell_degradation"];
    const double sd_cr = final_sd["cell2cell_capacity_resistance"];
    const double ratio = sd_deg / sd_cr;
    return {ratio >= 3.0 && gap <= 0.3,
            fmt("terminal SD %.4f Ah (degradation) vs %.4f Ah (capacity+resistance), ratio %.2f; mean gap %.3f pts",
                sd_deg, sd_cr, ratio, gap)};
}

Verdict control_week() {
    const std::vector<Scenario> v = make_preset("control_week");
    std::vector<double> cooling, eff, t_mean, spread;
    for (const Scenario& s : v) {
        const auto sim = simulate(s);
        const EnergyLedger& t = sim->totals();
        cooling.push_back((t.item(LossItem::fan) + t.item(LossItem::ac)) / 3.6e6);
        eff.push_back(100.0 * t.grid_out / t.grid_in);
        double weighted = 0.0, span = 0.0, worst = 0.0;
        for (const MetricsRow& r : sim->rows()) {
            weighted += r.t_mean * (r.time_end - r.time_start);
            span += r.time_end - r.time_start;
            worst = std::max(worst, r.t_spread_max);
        }
        t_mean.push_back(weighted / span);
        spread.push_back(worst);
    }
    if (v.size() != 5) return {false, "expected five control variants"};
    const bool cool = cooling[0] > std::max(cooling[1], cooling[2]) &&
                      std::min(cooling[1], cooling[2]) > std::max(cooling[3], cooling[4]);
    const double gain = std::min(eff[3], eff[4]) - std::max(eff[1], eff[2]);
    const bool coolest = std::min_element(t_mean.begin(), t_mean.end()) == t_mean.begin();
    const bool spread_order = spread[4] > spread[3];
    std::string d = "cooling kWh";
    for (double c : cooling) d += fmt(" %.2f", c);
    d += "; efficiency %";
    for (double e : eff) d += fmt(" %.2f", e);
    d += "; mean T C";
    for (double t : t_mean) d += fmt(" %.2f", kelvin_to_celsius(t));
    d += fmt("; spread 5 vs 4: %.2f vs %.2f K", spread[4], spread[3]);
    return {cool && gain >= 2.0 && coolest && spread_order, d};
}

Verdict calendar() {
    CellParams p = default_parameters().cell;
    Cell cell(p, default_parameters().ocv, std::make_shared<const RadialGrid>(p.shells), 1.0, p.T_ref);
    const double c0 = measure_cell_capacity(cell, 10.0);
    std::vector<double> days, fade;
    const double dt = 3600.0;
    for (int day = 1; day <= 200; ++day) {
        for (int h = 0; h < 24; ++h) {
            cell.prepare(dt);
            cell.commit(0.0);
        }
        if (day % 10 == 0) {
            days.push_back(day);
            fade.push_back(c0 - measure_cell_capacity(cell, 10.0));
        }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(days.size());
    for (std::size_t i = 0; i < days.size(); ++i) {
        const double lx = std::log(days[i]), ly = std::log(fade[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {k >= 0.4 && k <= 0.6, fmt("fade exponent %.3f, 200-day fade %.2f%%", k, 100.0 * fade.back() / c0)};
}

Verdict properties() {
    const std::string cmd = std::string(GRIDTWIN_UNIT_TESTS) + " --minimal";
    const int status = std::system(cmd.c_str());
    return {status == 0, fmt("unit suites exit status %d", status)};
}

Verdict rack_performance() {
    PresetOptions o;
    o.scale = "rack";
    o.cycles = 10;
    Scenario s = variant(make_preset("contact_r", o), "contact_r_contact_r");
    s.logging.capacity_every = 0;
    s.logging.capacity_at_start = false;
    const int threads = std::max(1u, std::thread::hardware_concurrency());
    const auto start = std::chrono::steady_clock::now();
    Simulation sim(s, threads);
    sim.run();
    track_closure(sim);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {wall <= 600.0, fmt("%zu cells x %zu cycles in %.1f s on %d thread(s)", sim.physical_cells(),
                               sim.rows().size(), wall, threads)};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        Verdict (*run)();
        bool gating;
    };
    const Criterion all[] = {
        {1, "parallel block current split", fig5, true},
        {2, "block thermal ordering", fig8, true},
        {3, "energy ledger closure", ledger_all, true},
        {4, "lithium conservation", lithium, true},
        {5, "contact resistance study", contact_r, true},
        {6, "cell-to-cell variation study", cell2cell, true},
        {7, "thermal control study", control_week, true},
        {8, "calendar ageing exponent", calendar, true},
        {9, "property suites", properties, true},
        {10, "rack performance", rack_performance, false},
    };
    // --known-fail N: N still prints FAIL but does not set the exit status; an unexpected PASS does.
    std::set<int> wanted, known;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--known-fail" && i + 1 < argc) known.insert(std::atoi(argv[++i]));
        else wanted.insert(std::atoi(argv[i]));
    }

    bool ok = true;
    for (const Criterion& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = v.pass ? "PASS" : (c.gating ? "FAIL" : "MISS");
        const bool expected_fail = c.gating && known.count(c.id);
        std::printf("[%s] %2d %-30s %s (%.0f s)%s\n", tag, c.id, c.name, v.detail.c_str(), wall,
                    !c.gating ? " [reported only]" : expected_fail ? " [known failure, see README]" : "");
        std::fflush(stdout);
        if (expected_fail) {
            if (v.pass) ok = false;
        } else if (c.gating && !v.pass) {
            ok = false;
        }
    }
    std::printf("max per-cycle closure error over all runs: %.2e\n", max_closure);
    return ok ? 0 : 1;
}
