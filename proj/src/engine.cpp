#include "gridtwin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridtwin/checkpoint.hpp"
#include "gridtwin/errors.hpp"

namespace gridtwin {

namespace {

// Positive once the limit is reached or passed.
double limit_excess(const UnitResponse& r, bool charging, double v_limit) {
    if (r.saturated) return 1.0;
    return charging ? r.cell_v_max - v_limit : v_limit - r.cell_v_min;
}

// Largest step in (0, dt] keeping the unit inside its limit at current I.
// Returns 0 when even a vanishing step would cross it.
double land_on_limit(Unit& u, double I, bool charging, double v_limit, double dt) {
    double lo = 0.0, hi = dt;
    for (int k = 0; k < 10; ++k) {
        const double mid = 0.5 * (lo + hi);
        u.prepare(mid);
        if (limit_excess(u.trial(I), charging, v_limit) >= 0.0) hi = mid;
        else lo = mid;
    }
    return lo;
}

// Current magnitude in [0, a_max] holding the limiting cell at v_limit
// (Illinois regula falsi). The unit must be prepared.
double regulate(Unit& u, bool charging, double v_limit, double a_max, double a_guess) {
    const double sign = charging ? -1.0 : 1.0;
    const double tol = 1e-6;
    auto f = [&](double a) { return limit_excess(u.trial(sign * a), charging, v_limit); };
    double lo = 0.0, hi = a_max;
    double f_lo = f(lo);
    if (f_lo >= 0.0) return 0.0;
    double f_hi = f(hi);
    if (f_hi <= 0.0) return a_max;
    // One secant probe from the warm start tightens the bracket quickly.
    if (a_guess > lo && a_guess < hi) {
        const double fg = f(a_guess);
        if (std::abs(fg) < tol) return a_guess;
        if (fg > 0.0) {
            hi = a_guess;
            f_hi = fg;
        } else {
            lo = a_guess;
            f_lo = fg;
        }
    }
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        const double a = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        const double fa = f(a);
        if (std::abs(fa) < tol || hi - lo < 1e-12 * a_max) return a;
        if (fa > 0.0) {
            hi = a;
            f_hi = fa;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        } else {
            lo = a;
            f_lo = fa;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        }
    }
    throw SolverError("constant-voltage regulation did not converge");
}

CccvResult cccv(Unit& u, double rate_a, double v_limit, double cutoff, double dt, double max_time, bool charging) {
    if (!(rate_a > 0.0) || !(dt > 0.0) || cutoff < 0.0) throw DomainError("invalid CCCV settings");
    const double sign = charging ? -1.0 : 1.0;
    CccvResult r;
    bool cv = false;
    double a = rate_a;
    while (r.time_s < max_time) {
        const double h = std::min(dt, max_time - r.time_s);
        u.prepare(h);
        if (!cv) {
            if (limit_excess(u.trial(sign * rate_a), charging, v_limit) < 0.0) {
                u.commit(sign * rate_a);
                r.charge_ah += rate_a * h / 3600.0;
                r.time_s += h;
                continue;
            }
            const double h_ok = land_on_limit(u, sign * rate_a, charging, v_limit, h);
            if (h_ok > 0.0) {
                u.prepare(h_ok);
                u.commit(sign * rate_a);
                r.charge_ah += rate_a * h_ok / 3600.0;
                r.time_s += h_ok;
            }
            cv = true;
            continue;
        }
        a = regulate(u, charging, v_limit, rate_a, a);
        if (a < cutoff || a == 0.0) break;
        u.commit(sign * a);
        r.charge_ah += a * h / 3600.0;
        r.time_s += h;
    }
    return r;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

void put_row(BinaryWriter& w, const MetricsRow& r) { w.put(r); }
MetricsRow get_row(BinaryReader& r) { return r.get<MetricsRow>(); }

} // namespace

CccvResult cccv_charge(Unit& unit, double rate_a, double v_limit, double i_cutoff_a, double dt, double max_time_s) {
    return cccv(unit, rate_a, v_limit, i_cutoff_a, dt, max_time_s, true);
}

CccvResult cccv_discharge(Unit& unit, double rate_a, double v_limit, double i_cutoff_a, double dt,
                          double max_time_s) {
    return cccv(unit, rate_a, v_limit, i_cutoff_a, dt, max_time_s, false);
}

double measure_cell_capacity(const Cell& cell, double dt) {
    Cell copy = cell;
    copy.degradation_enabled = false;
    copy.set_temperature(copy.params().T_ref);
    CellUnit u(std::move(copy));
    const CellParams& p = u.cell.params();
    const double one_c = p.one_c_current();
    cccv_discharge(u, one_c, p.V_min, 0.05 * one_c, dt);
    return cccv_charge(u, one_c, p.V_max, 0.05 * one_c, dt).charge_ah;
}

Simulation::Simulation(Scenario scenario, int threads) : sc_(std::move(scenario)) {
    sc_.validate();
    if (threads < 1) throw ConfigError("thread count must be at least 1");
    if (threads > 1) executor_ = std::make_unique<Executor>(threads);
    wall_start_ = std::chrono::steady_clock::now();
    build_tree();
    build_thermal();

    const CellParams& p = sc_.params.cell;
    one_c_ = p.one_c_current() * sc_.topology.parallel_count();
    if (sc_.converter) {
        double max_rate = 1.0;
        for (const ProtocolStep& s : sc_.protocol.steps) max_rate = std::max(max_rate, std::abs(s.rate_c));
        const double v_max = p.V_max * sc_.topology.series_count();
        const ConverterReference& ref = sc_.params.converter;
        converter_ = scale_converter(ref, ref.rating_factor * max_rate * one_c_ * v_max, ref.bus_factor * v_max);
        converter_.validate();
        has_converter_ = true;
    }
    next_balance_ = sc_.balancing.period_s > 0.0 ? sc_.balancing.period_s : unlimited;
    start_row();

    if (sc_.logging.capacity_every > 0 && sc_.logging.capacity_at_start) {
        CapacitySnapshot snap{0, 0.0, measure_capacities()};
        initial_capacity_mean_ = capacity_stats(snap.capacities).mean;
        last_capacity_mean_ = initial_capacity_mean_;
        snapshots_.push_back(std::move(snap));
    }
    log_frames();
}

Simulation::~Simulation() = default;

void Simulation::build_tree() {
    const std::size_t n_model = sc_.topology.model_cells();
    CellParams base = sc_.params.cell;
    base.degradation_acceleration = sc_.degradation_acceleration;
    std::vector<CellParams> params =
        sc_.vary ? sample_population(base, sc_.variation, n_model) : std::vector<CellParams>(n_model, base);
    for (const CellOverride& o : sc_.overrides) {
        CellParams& c = params.at(o.index);
        c.A_n *= o.capacity;
        c.A_p *= o.capacity;
        c.r_dc_n *= o.resistance;
        c.r_dc_p *= o.resistance;
        c.sei.k_sei_ref *= o.degradation;
        c.sei.D_sei_ref *= o.degradation;
        c.stress.beta_2 *= o.degradation;
    }
    auto grid = std::make_shared<const RadialGrid>(base.shells);
    std::size_t next_cell = 0, next_group = 0;

    std::function<std::unique_ptr<Unit>(const TopologySpec&, double)> build =
        [&](const TopologySpec& t, double weight) -> std::unique_ptr<Unit> {
        if (t.kind == TopologyKind::cell) {
            const std::size_t k = next_cell++;
            Cell c(params[k], sc_.params.ocv, grid, sc_.initial_soc, sc_.thermal.T_initial);
            c.degradation_enabled = sc_.degradation;
            c.multiplicity = weight;
            auto u = std::make_unique<CellUnit>(std::move(c));
            u->name = t.name.empty() ? "cell_" + std::to_string(k + 1) : t.name + "_" + std::to_string(k + 1);
            cell_weight_.push_back(weight);
            return u;
        }
        std::vector<std::unique_ptr<Unit>> children;
        std::vector<double> contacts;
        std::unique_ptr<Group> g;
        if (t.kind == TopologyKind::scaled) {
            children.push_back(build(t.child.at(0), weight * t.scale_series * t.scale_parallel));
            g = std::make_unique<Group>(GroupKind::scaled, std::move(children), std::vector<double>{t.contact_r});
            g->scale_series = t.scale_series;
            g->scale_parallel = t.scale_parallel;
        } else {
            for (int j = 0; j < t.count; ++j) children.push_back(build(t.child.at(0), weight));
            contacts = t.contact_list.empty() ? std::vector<double>(static_cast<std::size_t>(t.count), t.contact_r)
                                              : t.contact_list;
            g = std::make_unique<Group>(t.kind == TopologyKind::series ? GroupKind::series : GroupKind::parallel,
                                        std::move(children), contacts);
        }
        g->closed = t.closed;
        g->pi.k_p = sc_.pi_k_p;
        g->pi.k_i = sc_.pi_k_i;
        g->pi.tolerance = sc_.pi_tolerance;
        g->pi.max_iterations = sc_.pi_max_iterations;
        g->set_executor(executor_.get());
        const std::size_t id = next_group++;
        g->name = t.name.empty() ? "group_" + std::to_string(id + 1) : t.name;
        return g;
    };
    root_ = build(sc_.topology, 1.0);
    tree_ = index_tree(*root_);

    // Group weights follow the same postorder as the index.
    group_weight_.clear();
    std::function<void(Unit&, double)> weigh = [&](Unit& u, double w) {
        Group* g = u.as_group();
        if (!g) return;
        const double inner = g->kind() == GroupKind::scaled ? w * g->scale_series * g->scale_parallel : w;
        for (std::size_t j = 0; j < g->size(); ++j) weigh(g->child(j), inner);
        group_weight_.push_back(w);
    };
    weigh(*root_, 1.0);
    physical_cells_ = sc_.topology.cell_count();
}

void Simulation::build_thermal() {
    group_node_.assign(tree_.groups.size(), -1);
    if (sc_.thermal.mode == ThermalMode::isothermal) {
        for (CellUnit* c : tree_.cells) {
            temperature_names_.push_back(c->name);
            temperature_kinds_.push_back("cell");
        }
        return;
    }
    network_ = std::make_unique<ThermalNetwork>();
    ThermalNetwork& net = *network_;
    const ThermalCoefficients& k = sc_.params.thermal;
    const CellParams& cp = sc_.params.cell;
    const double T0 = sc_.thermal.T_initial;
    const double A_cell = cp.A_cell;
    cell_node_.assign(tree_.cells.size(), -1);

    auto add_cell_node = [&](std::size_t i) {
        CellUnit* c = tree_.cells[i];
        const double w = cell_weight_[i];
        const int id = net.add_node({c->name, NodeKind::cell, T0, w * c->cell.params().heat_capacity(), 0.0, 0.0});
        cell_node_[i] = id;
        c->thermal_node = id;
        return id;
    };

    if (sc_.thermal.mode == ThermalMode::individual_cell) {
        for (std::size_t i = 0; i < tree_.cells.size(); ++i) {
            const int id = add_cell_node(i);
            ThermalLink l;
            l.a = id;
            l.b = ThermalNetwork::environment;
            l.conv_area = cell_weight_[i] * A_cell * k.convective_fraction;
            net.add_link(l);
        }
    } else {
        const double n_all = static_cast<double>(physical_cells_);
        container_node_ = net.add_node({"container", NodeKind::container, T0, k.container_heat_capacity * n_all, 0.0, 0.0});
        const int circulation = net.add_fan(scale_fan(sc_.params.fan_per_cell, n_all));
        const int ac_fan = net.add_fan(scale_fan(sc_.params.fan_per_cell, n_all));
        {
            ThermalLink wall;
            wall.a = container_node_;
            wall.b = ThermalNetwork::environment;
            wall.fixed = k.container_wall * n_all;
            net.add_link(wall);
            ThermalLink vent;
            vent.a = container_node_;
            vent.b = ThermalNetwork::environment;
            vent.flow_actuator = ac_fan;
            vent.outflow_only = true;
            net.add_link(vent);
        }
        actuators_.push_back({false, circulation, container_node_, 0, tree_.cells.size(), 0.0, {}, 0.0});
        double chiller = sc_.params.ac.P_nom > 0.0 ? sc_.params.ac.P_nom : k.chiller_power * n_all;
        actuators_.push_back({true, ac_fan, container_node_, 0, tree_.cells.size(), chiller, {}, 0.0});

        // Walk the tree; cells and groups live in the compartment of their
        // nearest closed ancestor.
        std::size_t cell_cursor = 0, group_cursor = 0;
        std::function<void(Unit&, int, int, double)> walk = [&](Unit& u, int compartment, int fan, double w) {
            if (u.as_cell()) {
                const std::size_t i = cell_cursor++;
                const int id = add_cell_node(i);
                ThermalLink l;
                l.a = id;
                l.b = compartment;
                l.conv_area = cell_weight_[i] * A_cell * k.convective_fraction;
                l.conv_actuator = fan;
                net.add_link(l);
                return;
            }
            Group* g = u.as_group();
            const std::size_t first_cell = cell_cursor;
            int inner = compartment, inner_fan = fan;
            const double inner_w = g->kind() == GroupKind::scaled ? w * g->scale_series * g->scale_parallel : w;
            std::size_t act_index = 0;
            if (g->closed) {
                double n = 0.0; // physical cells served
                std::function<void(Unit&, double)> count = [&](Unit& v, double ww) {
                    if (v.as_cell()) {
                        n += ww;
                        return;
                    }
                    Group* h = v.as_group();
                    const double in = h->kind() == GroupKind::scaled ? ww * h->scale_series * h->scale_parallel : ww;
                    for (std::size_t j = 0; j < h->size(); ++j) count(h->child(j), in);
                };
                count(u, w);
                inner = net.add_node({g->name, NodeKind::group, T0, k.group_heat_capacity * n, 0.0, 0.0});
                inner_fan = net.add_fan(scale_fan(sc_.params.fan_per_cell, n));
                g->thermal_node = inner;
                act_index = actuators_.size();
                actuators_.push_back({false, inner_fan, inner, first_cell, first_cell, 0.0, {}, 0.0});
                // Exterior swept by the enclosing fan plus the group's own air exchange.
                ThermalLink ext;
                ext.a = inner;
                ext.b = compartment;
                ext.conv_area = k.group_exterior_area * n;
                ext.conv_actuator = fan;
                ext.flow_actuator = inner_fan;
                net.add_link(ext);
            }
            std::vector<int> child_cells;
            for (std::size_t j = 0; j < g->size(); ++j) {
                Unit& c = g->child(j);
                if (c.as_cell()) child_cells.push_back(static_cast<int>(cell_cursor));
                walk(c, inner, inner_fan, inner_w);
            }
            // Stacked sibling cells conduct to each other; the ends touch the enclosure.
            if (!child_cells.empty() && g->kind() != GroupKind::scaled) {
                for (std::size_t j = 0; j + 1 < child_cells.size(); ++j) {
                    const auto a = static_cast<std::size_t>(child_cells[j]), b = static_cast<std::size_t>(child_cells[j + 1]);
                    ThermalLink l;
                    l.a = cell_node_[a];
                    l.b = cell_node_[b];
                    l.fixed = k.h_cell_cell * A_cell * std::min(cell_weight_[a], cell_weight_[b]);
                    net.add_link(l);
                }
                for (int e : {child_cells.front(), child_cells.back()}) {
                    const auto i = static_cast<std::size_t>(e);
                    ThermalLink l;
                    l.a = cell_node_[i];
                    l.b = inner;
                    l.fixed = k.h_wall * A_cell * cell_weight_[i];
                    net.add_link(l);
                    if (child_cells.size() == 1) break;
                }
            }
            if (g->closed) actuators_[act_index].cell_end = cell_cursor;
            group_node_[group_cursor++] = inner;
        };
        walk(*root_, container_node_, circulation, 1.0);
    }
    for (const ThermalNode& n : net.nodes()) {
        temperature_names_.push_back(n.name);
        temperature_kinds_.push_back(n.kind == NodeKind::cell ? "cell" : n.kind == NodeKind::group ? "group" : "container");
    }
}

double Simulation::nominal_energy_j() const {
    const CellParams& p = sc_.params.cell;
    return p.Q_nom * 3600.0 * p.V_nom * static_cast<double>(physical_cells_);
}

std::vector<double> Simulation::measure_capacities() {
    std::vector<double> out(tree_.cells.size());
    auto body = [&](std::size_t i) { out[i] = measure_cell_capacity(tree_.cells[i]->cell, sc_.capacity_dt); };
    if (executor_) executor_->parallel_for(out.size(), body);
    else
        for (std::size_t i = 0; i < out.size(); ++i) body(i);
    return out;
}

double Simulation::step_current(const ProtocolStep& s) const { return s.rate_c * one_c_; }

double Simulation::limit_for(const ProtocolStep& s, bool charging) const {
    if (s.v_limit != 0.0) return s.v_limit;
    return charging ? sc_.params.cell.V_max : sc_.params.cell.V_min;
}

void Simulation::apply_control() {
    if (!network_ || actuators_.empty()) return;
    ThermalNetwork& net = *network_;
    const Strategy strategy = sc_.thermal.strategy;
    const ControlThresholds& th = sc_.thermal.thresholds;
    for (Actuator& a : actuators_) {
        const double T_local = net.nodes()[static_cast<std::size_t>(a.node)].T;
        double T_hot = -std::numeric_limits<double>::infinity();
        for (std::size_t i = a.cell_begin; i < a.cell_end; ++i) T_hot = std::max(T_hot, tree_.cells[i]->cell.temperature());
        if (a.cell_begin == a.cell_end) T_hot = T_local;
        if (!a.is_ac) {
            a.command = fan_command(strategy, th, T_local, T_hot, a.latch);
            net.set_fan_command(a.fan, a.command);
            continue;
        }
        a.command = ac_command(strategy, th, T_local, T_hot, a.latch);
        ThermalNode& node = net.nodes()[static_cast<std::size_t>(a.node)];
        const bool free_cooling = sc_.thermal.env.mode == AcMode::direct_air && T_local > sc_.thermal.env.T_inf;
        if (free_cooling) {
            net.set_fan_command(a.fan, a.command);
            node.sink = 0.0;
        } else {
            net.set_fan_command(a.fan, 0.0);
            node.sink = a.command * sc_.params.ac.cop * a.chiller_power;
        }
    }
}

double Simulation::aux_power() const {
    if (!network_) return 0.0;
    double p = 0.0;
    for (const Actuator& a : actuators_) {
        const FanState& f = network_->fans()[static_cast<std::size_t>(a.fan)];
        p += fan_power(f.speed, f.params);
        if (a.is_ac) p += network_->nodes()[static_cast<std::size_t>(a.node)].sink / sc_.params.ac.cop;
    }
    return p;
}

void Simulation::thermal_update(double dt) {
    if (!network_) return;
    ThermalNetwork& net = *network_;
    for (ThermalNode& n : net.nodes()) n.generated = 0.0;
    for (std::size_t i = 0; i < tree_.cells.size(); ++i)
        net.nodes()[static_cast<std::size_t>(cell_node_[i])].generated += cell_weight_[i] * tree_.cells[i]->last.heat;
    if (container_node_ >= 0) {
        for (std::size_t g = 0; g < tree_.groups.size(); ++g)
            net.nodes()[static_cast<std::size_t>(group_node_[g])].generated +=
                group_weight_[g] * tree_.groups[g]->contact_power();
        const double I = root_->current();
        ThermalNode& c = net.nodes()[static_cast<std::size_t>(container_node_)];
        c.generated += sc_.terminal_r * I * I;
        if (has_converter_ && I != 0.0) {
            const double V = root_->voltage() - sc_.terminal_r * I;
            c.generated += converter_losses(I, V, V * I, converter_).total();
        }
    }
    const double limit = net.max_stable_dt();
    const int n = std::max(1, static_cast<int>(std::ceil(dt / limit * (1.0 - 1e-12))));
    const double h = dt / n;
    for (int k = 0; k < n; ++k) net.exchange_step(h, sc_.thermal.env.T_inf);
    for (std::size_t i = 0; i < tree_.cells.size(); ++i)
        tree_.cells[i]->cell.set_temperature(net.nodes()[static_cast<std::size_t>(cell_node_[i])].T);
}

void Simulation::start_row() {
    row_ = MetricsRow{};
    row_.time_start = time_;
    row_.time_end = time_;
    row_.fec = fec_;
    row_has_discharge_ = false;
    row_T_integral_ = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (CellUnit* c : tree_.cells) {
        lo = std::min(lo, c->cell.temperature());
        hi = std::max(hi, c->cell.temperature());
    }
    row_.t_min = lo;
    row_.t_max = hi;
    row_.t_spread_max = hi - lo;
}

void Simulation::close_row(bool complete) {
    MetricsRow r = row_;
    r.cycle = static_cast<long>(rows_.size()) + 1;
    r.time_end = time_;
    r.fec = fec_;
    r.complete = complete;
    r.efficiency = r.ledger.grid_in > 0.0 ? r.ledger.grid_out / r.ledger.grid_in : 0.0;
    r.usable_energy = r.ledger.grid_out_discharge / nominal_energy_j();
    const double span = r.time_end - r.time_start;
    r.t_mean = span > 0.0 ? row_T_integral_ / span : 0.5 * (r.t_min + r.t_max);
    if (complete && sc_.logging.capacity_every > 0 && r.cycle % sc_.logging.capacity_every == 0) {
        CapacitySnapshot snap{r.cycle, time_, measure_capacities()};
        r.capacity = capacity_stats(snap.capacities);
        if (initial_capacity_mean_ == 0.0) initial_capacity_mean_ = r.capacity.mean;
        last_capacity_mean_ = r.capacity.mean;
        snapshots_.push_back(std::move(snap));
    }
    rows_.push_back(r);
    start_row();
    if (on_row) on_row(*this, rows_.back());
}

void Simulation::finish(const std::string& reason) {
    if (finished_) return;
    if (row_.time_end > row_.time_start) close_row(false);
    finished_ = true;
    stop_reason_ = reason;
}

bool Simulation::check_stop() {
    if (finished_) return true;
    const StopConditions& s = sc_.stop;
    if (time_ >= s.time_s) finish("time limit");
    else if (s.cycles >= 0 && static_cast<long>(rows_.size()) >= s.cycles) finish("cycle count");
    else if (fec_ >= s.fec) finish("equivalent cycles");
    else if (s.capacity_floor > 0.0 && initial_capacity_mean_ > 0.0 &&
             last_capacity_mean_ < s.capacity_floor * initial_capacity_mean_)
        finish("capacity floor");
    else if (std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count() >= s.wall_clock_s)
        finish("wall-clock limit");
    else if (s.end_of_life &&
             std::any_of(tree_.cells.begin(), tree_.cells.end(),
                         [](CellUnit* c) { return c->cell.state().deg.end_of_life; }))
        finish("cell end of life");
    return finished_;
}

void Simulation::next_step() {
    cursor_.step += 1;
    cursor_.elapsed = 0.0;
    cursor_.phase = 0;
    if (++stalled_ > 2 * static_cast<int>(sc_.protocol.steps.size()) + 2) {
        finish("no progress: every protocol step ends at its limit immediately");
        return;
    }
    if (cursor_.step >= sc_.protocol.steps.size()) {
        cursor_.step = 0;
        cursor_.repeat += 1;
        if (sc_.protocol.repeat >= 0 && cursor_.repeat >= sc_.protocol.repeat) finish("protocol complete");
    }
}

void Simulation::run() {
    while (advance()) {
    }
}

bool Simulation::advance() {
    if (check_stop()) return false;
    const ProtocolStep& s = sc_.protocol.steps[cursor_.step];
    const double remaining = s.duration_s - cursor_.elapsed;
    if (remaining <= 1e-9) {
        next_step();
        return !finished_;
    }
    const bool active = s.mode != StepMode::rest && cursor_.phase != 2;
    if (active && step_current(s) < 0.0 && row_has_discharge_) {
        close_row(true);
        if (check_stop()) return false;
    }
    if (!active && time_ >= next_balance_) {
        balance();
        while (next_balance_ <= time_) next_balance_ += sc_.balancing.period_s;
    }
    apply_control();
    if (!active) do_rest(remaining);
    else if (cursor_.phase == 0) {
        if (do_cc(s, remaining)) {
            if (s.mode == StepMode::cccv) {
                cursor_.phase = 1;
                cv_current_ = std::abs(step_current(s));
            } else if (s.hold_slot && std::isfinite(s.duration_s)) cursor_.phase = 2;
            else next_step();
        }
    } else if (do_cv(s, remaining)) {
        if (s.hold_slot && std::isfinite(s.duration_s)) cursor_.phase = 2;
        else next_step();
    }
    return !finished_;
}

bool Simulation::do_cc(const ProtocolStep& s, double remaining) {
    const double I = step_current(s);
    const bool charging = I < 0.0;
    const double v_limit = limit_for(s, charging);
    double h = std::min(sc_.dt, remaining);
    root_->prepare(h);
    if (limit_excess(root_->trial(I), charging, v_limit) < 0.0) {
        commit_step(h, I, 0);
        return false;
    }
    h = land_on_limit(*root_, I, charging, v_limit, h);
    if (h > 0.0) {
        root_->prepare(h);
        commit_step(h, I, 0);
    }
    return true;
}

bool Simulation::do_cv(const ProtocolStep& s, double remaining) {
    const double I_cc = step_current(s);
    const bool charging = I_cc < 0.0;
    const double v_limit = limit_for(s, charging);
    const double h = std::min(sc_.dt, remaining);
    root_->prepare(h);
    const double a = regulate(*root_, charging, v_limit, std::abs(I_cc), cv_current_);
    if (a < s.i_cutoff_c * one_c_ || a == 0.0) return true;
    cv_current_ = a;
    commit_step(h, charging ? -a : a, 1);
    return false;
}

void Simulation::do_rest(double remaining) {
    const double h = std::min(sc_.dt_rest > 0.0 ? sc_.dt_rest : sc_.dt, remaining);
    root_->prepare(h);
    commit_step(h, 0.0, 2);
}

void Simulation::commit_step(double dt, double I, int phase) {
    root_->commit(I);
    stalled_ = 0;

    double p_cells = 0.0, ocv = 0.0, loss = 0.0, moved = 0.0;
    for (std::size_t i = 0; i < tree_.cells.size(); ++i) {
        const CellStepRecord& r = tree_.cells[i]->last;
        const double w = cell_weight_[i];
        ocv += w * r.ocv_power;
        loss += w * r.loss_power;
        moved += w * std::abs(r.current);
    }
    p_cells = ocv - loss;
    double contacts = sc_.terminal_r * I * I;
    for (std::size_t g = 0; g < tree_.groups.size(); ++g) contacts += group_weight_[g] * tree_.groups[g]->contact_power();
    const double p_dc = p_cells - contacts;
    const double V_dc = root_->voltage() - sc_.terminal_r * I;
    ConverterLosses conv;
    if (has_converter_) conv = converter_losses(I, V_dc, p_dc, converter_);

    double p_fan = 0.0, p_ac = 0.0;
    if (network_)
        for (const Actuator& a : actuators_) {
            const FanState& f = network_->fans()[static_cast<std::size_t>(a.fan)];
            const double pf = fan_power(f.speed, f.params);
            if (a.is_ac) p_ac += pf + network_->nodes()[static_cast<std::size_t>(a.node)].sink / sc_.params.ac.cop;
            else p_fan += pf;
        }
    const double p_grid = p_dc - conv.total() - p_fan - p_ac;

    EnergyLedger step;
    if (p_grid > 0.0) step.grid_out = p_grid * dt;
    else step.grid_in = -p_grid * dt;
    if (I > 0.0) step.grid_out_discharge = p_grid * dt;
    step.delta_stored = -ocv * dt;
    step.add(LossItem::cell_ohmic, loss * dt);
    step.add(LossItem::contact, contacts * dt);
    step.add(LossItem::converter_cond, conv.conduction * dt);
    step.add(LossItem::converter_sw, conv.switching * dt);
    step.add(LossItem::converter_passive, conv.passive * dt);
    step.add(LossItem::fan, p_fan * dt);
    step.add(LossItem::ac, p_ac * dt);
    for (EnergyLedger* l : {&row_.ledger, &totals_}) {
        l->grid_in += step.grid_in;
        l->grid_out += step.grid_out;
        l->grid_out_discharge += step.grid_out_discharge;
        l->delta_stored += step.delta_stored;
        for (int k = 0; k < loss_item_count; ++k) l->losses[k] += step.losses[k];
    }
    const double throughput = moved * dt / 3600.0;
    row_.throughput_ah += throughput;
    const double d_fec = throughput / (2.0 * static_cast<double>(physical_cells_) * sc_.params.cell.Q_nom);
    row_.fec_increment += d_fec;
    fec_ += d_fec;
    if (I > 0.0) row_has_discharge_ = true;

    thermal_update(dt);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < tree_.cells.size(); ++i) {
        const double T = tree_.cells[i]->cell.temperature();
        lo = std::min(lo, T);
        hi = std::max(hi, T);
        mean += cell_weight_[i] * T;
        wsum += cell_weight_[i];
    }
    mean /= wsum;
    row_T_integral_ += mean * dt;
    row_.t_min = std::min(row_.t_min, lo);
    row_.t_max = std::max(row_.t_max, hi);
    row_.t_spread_max = std::max(row_.t_spread_max, hi - lo);

    time_ += dt;
    cursor_.elapsed += dt;
    row_.time_end = time_;
    ++step_counter_;
    log_frames();
    if (observer) {
        StepInfo info;
        info.dt = dt;
        info.current = I;
        info.voltage = V_dc;
        info.p_dc = p_dc;
        info.p_aux = p_fan + p_ac;
        info.p_converter = conv.total();
        info.step_index = cursor_.step;
        info.phase = phase;
        observer(*this, info);
    }
}

void Simulation::log_frames() {
    const double tol = 1e-9;
    if (sc_.logging.temperature_every_s > 0.0 && time_ + tol >= next_temperature_log_) {
        TemperatureFrame f;
        f.time = time_;
        if (network_)
            for (const ThermalNode& n : network_->nodes()) f.T.push_back(n.T);
        else
            for (CellUnit* c : tree_.cells) f.T.push_back(c->cell.temperature());
        temperatures_.push_back(std::move(f));
        while (next_temperature_log_ <= time_ + tol) next_temperature_log_ += sc_.logging.temperature_every_s;
    }
    if (sc_.logging.trace_every_s > 0.0 && time_ + tol >= next_trace_log_) {
        TraceFrame f;
        f.time = time_;
        f.pack_current = root_->current();
        f.pack_voltage = root_->voltage() - sc_.terminal_r * root_->current();
        for (CellUnit* c : tree_.cells) {
            f.current.push_back(c->current());
            f.voltage.push_back(c->voltage());
        }
        traces_.push_back(std::move(f));
        while (next_trace_log_ <= time_ + tol) next_trace_log_ += sc_.logging.trace_every_s;
    }
}

double Simulation::balance() {
    std::vector<double> v(tree_.cells.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = tree_.cells[i]->cell.rest_voltage();
    if (v.empty()) return 0.0;
    const double target = *std::min_element(v.begin(), v.end());
    const double tol = sc_.balancing.tolerance_v;
    double removed = 0.0, stored = 0.0, ohmic = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= target + tol) continue;
        Cell& c = tree_.cells[i]->cell;
        const double w = cell_weight_[i];
        const bool deg = c.degradation_enabled;
        c.degradation_enabled = false;
        const double I = sc_.balancing.current_c * c.params().one_c_current();
        const double T = c.temperature(), T_ref = c.params().T_ref;
        auto emf_after = [&](double h) {
            c.prepare(h);
            const CellTrial t = c.trial(I);
            return t.U_p - t.U_n + (T - T_ref) * t.dUdT;
        };
        const double h_max = sc_.capacity_dt;
        for (int guard = 0; guard < 1000000; ++guard) {
            double h = h_max;
            bool last = false;
            if (emf_after(h) <= target) {
                double lo = 0.0, hi = h;
                for (int k = 0; k < 30; ++k) {
                    const double mid = 0.5 * (lo + hi);
                    if (emf_after(mid) <= target) hi = mid;
                    else lo = mid;
                }
                h = hi;
                last = true;
                c.prepare(h);
            }
            const CellStepRecord r = c.commit(I);
            removed += w * r.voltage * I * h;
            stored -= w * r.ocv_power * h;
            ohmic += w * r.loss_power * h;
            if (last) break;
        }
        c.degradation_enabled = deg;
    }
    for (EnergyLedger* l : {&row_.ledger, &totals_}) {
        l->add(LossItem::balancing, removed);
        l->add(LossItem::cell_ohmic, ohmic);
        l->delta_stored += stored;
    }
    return removed;
}

std::uint64_t Simulation::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    const std::uint64_t sizes[] = {tree_.cells.size(), tree_.groups.size(), network_ ? network_->nodes().size() : 0,
                                   sc_.protocol.steps.size(), physical_cells_};
    h = fnv1a(h, sizes, sizeof sizes);
    const double values[] = {sc_.params.cell.Q_nom, sc_.params.cell.A_n, sc_.dt, sc_.initial_soc};
    return fnv1a(h, values, sizeof values);
}

std::vector<std::uint8_t> Simulation::checkpoint() const {
    BinaryWriter w;
    w.put(fingerprint());
    w.put(time_);
    w.put(fec_);
    w.put(cv_current_);
    w.put<std::uint64_t>(cursor_.step);
    w.put(cursor_.repeat);
    w.put(cursor_.elapsed);
    w.put(cursor_.phase);
    w.put<std::uint8_t>(row_has_discharge_);
    w.put(row_T_integral_);
    w.put(next_balance_);
    w.put(next_temperature_log_);
    w.put(next_trace_log_);
    w.put(initial_capacity_mean_);
    w.put(last_capacity_mean_);
    w.put<std::uint64_t>(step_counter_);
    w.put(stalled_);
    put_row(w, row_);
    w.put(totals_);
    w.put<std::uint64_t>(rows_.size());
    for (const MetricsRow& r : rows_) put_row(w, r);
    w.put<std::uint64_t>(snapshots_.size());
    for (const CapacitySnapshot& s : snapshots_) {
        w.put(s.cycle);
        w.put(s.time);
        w.put_vector(s.capacities);
    }
    w.put<std::uint64_t>(temperatures_.size());
    for (const TemperatureFrame& f : temperatures_) {
        w.put(f.time);
        w.put_vector(f.T);
    }
    w.put<std::uint64_t>(traces_.size());
    for (const TraceFrame& f : traces_) {
        w.put(f.time);
        w.put(f.pack_current);
        w.put(f.pack_voltage);
        w.put_vector(f.current);
        w.put_vector(f.voltage);
    }
    for (CellUnit* c : tree_.cells) c->save(w);
    for (Group* g : tree_.groups) g->save(w);
    if (network_) {
        for (const ThermalNode& n : network_->nodes()) {
            w.put(n.T);
            w.put(n.sink);
        }
        for (const FanState& f : network_->fans()) {
            w.put(f.command);
            w.put(f.speed);
        }
        for (const Actuator& a : actuators_) {
            w.put<std::uint8_t>(a.latch.on);
            w.put(a.command);
        }
    }
    return seal_checkpoint(w.bytes());
}

void Simulation::restore(const std::vector<std::uint8_t>& bytes) {
    const std::vector<std::uint8_t> payload = open_checkpoint(bytes);
    BinaryReader r(payload.data(), payload.size());
    if (r.get<std::uint64_t>() != fingerprint())
        throw CheckpointError("checkpoint was written for a different scenario");
    time_ = r.get<double>();
    fec_ = r.get<double>();
    cv_current_ = r.get<double>();
    cursor_.step = r.get<std::uint64_t>();
    cursor_.repeat = r.get<long>();
    cursor_.elapsed = r.get<double>();
    cursor_.phase = r.get<int>();
    if (cursor_.step >= sc_.protocol.steps.size()) throw CheckpointError("checkpoint protocol cursor out of range");
    row_has_discharge_ = r.get<std::uint8_t>() != 0;
    row_T_integral_ = r.get<double>();
    next_balance_ = r.get<double>();
    next_temperature_log_ = r.get<double>();
    next_trace_log_ = r.get<double>();
    initial_capacity_mean_ = r.get<double>();
    last_capacity_mean_ = r.get<double>();
    step_counter_ = r.get<std::uint64_t>();
    stalled_ = r.get<int>();
    row_ = get_row(r);
    totals_ = r.get<EnergyLedger>();
    rows_.resize(r.get<std::uint64_t>());
    for (MetricsRow& row : rows_) row = get_row(r);
    snapshots_.resize(r.get<std::uint64_t>());
    for (CapacitySnapshot& s : snapshots_) {
        s.cycle = r.get<long>();
        s.time = r.get<double>();
        s.capacities = r.get_vector();
    }
    temperatures_.resize(r.get<std::uint64_t>());
    for (TemperatureFrame& f : temperatures_) {
        f.time = r.get<double>();
        f.T = r.get_vector();
    }
    traces_.resize(r.get<std::uint64_t>());
    for (TraceFrame& f : traces_) {
        f.time = r.get<double>();
        f.pack_current = r.get<double>();
        f.pack_voltage = r.get<double>();
        f.current = r.get_vector();
        f.voltage = r.get_vector();
    }
    for (CellUnit* c : tree_.cells) c->load(r);
    for (Group* g : tree_.groups) g->load(r);
    if (network_) {
        for (ThermalNode& n : network_->nodes()) {
            n.T = r.get<double>();
            n.sink = r.get<double>();
        }
        for (FanState& f : network_->fans()) {
            f.command = r.get<double>();
            f.speed = r.get<double>();
        }
        for (Actuator& a : actuators_) {
            a.latch.on = r.get<std::uint8_t>() != 0;
            a.command = r.get<double>();
        }
    }
    if (!r.at_end()) throw CheckpointError("checkpoint has trailing data");
    finished_ = false;
    stop_reason_.clear();
}

} // namespace gridtwin
