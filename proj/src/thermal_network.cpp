#include "gridtwin/thermal_network.hpp"

#include <algorithm>
#include <limits>

#include "gridtwin/errors.hpp"

namespace gridtwin {

int ThermalNetwork::add_node(ThermalNode node) {
    if (!(node.heat_capacity > 0.0)) throw ConfigError("thermal node needs a positive heat capacity");
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int ThermalNetwork::add_link(ThermalLink link) {
    const int n = static_cast<int>(nodes_.size());
    if (link.a < 0 || link.a >= n || link.b >= n || link.a == link.b) throw ConfigError("invalid thermal link");
    if (link.fixed < 0.0 || link.conv_area < 0.0) throw ConfigError("thermal conductances must be non-negative");
    links_.push_back(link);
    return static_cast<int>(links_.size()) - 1;
}

int ThermalNetwork::add_fan(FanParams p) {
    p.validate();
    fans_.push_back({p, 0.0, 0.0});
    return static_cast<int>(fans_.size()) - 1;
}

void ThermalNetwork::set_fan_command(int fan, double u) {
    FanState& f = fans_.at(static_cast<std::size_t>(fan));
    f.command = std::clamp(u, 0.0, 1.0);
    f.speed = fan_speed_for_command(f.command, f.params);
}

double ThermalNetwork::open_conductance(const ThermalLink& l) const {
    double G = l.fixed;
    if (l.conv_actuator >= 0) G += l.conv_area * fan_convection(fans_[static_cast<std::size_t>(l.conv_actuator)].speed);
    else if (l.conv_area > 0.0) G += l.conv_area * fan_convection(0.0);
    if (l.flow_actuator >= 0) {
        const FanState& f = fans_[static_cast<std::size_t>(l.flow_actuator)];
        G += f.params.rho_air * f.params.cp_air * f.flow();
    }
    return G;
}

double ThermalNetwork::conductance(const ThermalLink& l, double T_a, double T_b) const {
    if (l.outflow_only && T_a <= T_b) return 0.0;
    return open_conductance(l);
}

double ThermalNetwork::max_stable_dt() const {
    std::vector<double> total(nodes_.size(), 0.0);
    for (const ThermalLink& l : links_) {
        const double G = open_conductance(l);
        total[static_cast<std::size_t>(l.a)] += G;
        if (l.b >= 0) total[static_cast<std::size_t>(l.b)] += G;
    }
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (total[i] > 0.0) dt = std::min(dt, 0.1 * nodes_[i].heat_capacity / total[i]);
    return dt;
}

ExchangeResult ThermalNetwork::exchange_step(double dt, double T_inf) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (dt > max_stable_dt() * (1.0 + 1e-12))
        throw SolverError("thermal step exceeds the explicit stability limit");
    ExchangeResult r;
    flux_.assign(nodes_.size(), 0.0);
    for (const ThermalLink& l : links_) {
        const double Ta = nodes_[static_cast<std::size_t>(l.a)].T;
        const double Tb = l.b >= 0 ? nodes_[static_cast<std::size_t>(l.b)].T : T_inf;
        const double q = conductance(l, Ta, Tb) * (Ta - Tb);
        flux_[static_cast<std::size_t>(l.a)] -= q;
        if (l.b >= 0) flux_[static_cast<std::size_t>(l.b)] += q;
        else r.removed += q * dt;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        ThermalNode& n = nodes_[i];
        r.generated += n.generated * dt;
        r.removed += n.sink * dt;
        n.T += (n.generated - n.sink + flux_[i]) * dt / n.heat_capacity;
    }
    return r;
}

double ThermalNetwork::stored_energy() const {
    double e = 0.0;
    for (const ThermalNode& n : nodes_) e += n.heat_capacity * n.T;
    return e;
}

} // namespace gridtwin
