#pragma once

#include <string>
#include <vector>

#include "gridtwin/ancillary.hpp"

namespace gridtwin {

enum class NodeKind { cell, group, container };

struct ThermalNode {
    std::string name;
    NodeKind kind = NodeKind::cell;
    double T = 298.15;
    double heat_capacity = 1.0; // J/K
    double generated = 0.0;     // W, reset by the caller each step
    double sink = 0.0;          // W removed directly to the environment
};

// Conductance G = fixed + conv_area * h(v of conv_actuator)
//               + rho cp * flow(flow_actuator). b < 0 means the environment.
struct ThermalLink {
    int a = -1;
    int b = -1;
    double fixed = 0.0;         // W/K
    double conv_area = 0.0;     // m^2
    int conv_actuator = -1;
    int flow_actuator = -1;
    bool outflow_only = false;  // exchange only while a is warmer than b
};

struct FanState {
    FanParams params;
    double command = 0.0;
    double speed = 0.0; // m/s
    double flow() const { return params.A_fan * speed; }
};

struct ExchangeResult {
    double removed = 0.0;   // J to the environment
    double generated = 0.0; // J injected
};

class ThermalNetwork {
public:
    static constexpr int environment = -1;

    int add_node(ThermalNode node);
    int add_link(ThermalLink link);
    int add_fan(FanParams p);

    void set_fan_command(int fan, double u);

    std::vector<ThermalNode>& nodes() { return nodes_; }
    const std::vector<ThermalNode>& nodes() const { return nodes_; }
    const std::vector<ThermalLink>& links() const { return links_; }
    std::vector<FanState>& fans() { return fans_; }
    const std::vector<FanState>& fans() const { return fans_; }

    double conductance(const ThermalLink& l, double T_a, double T_b) const;
    // Largest dt satisfying the stability guard at the present fan state.
    double max_stable_dt() const;
    // Explicit synchronous update; throws if dt exceeds max_stable_dt().
    ExchangeResult exchange_step(double dt, double T_inf);
    double stored_energy() const; // sum C T

private:
    double open_conductance(const ThermalLink& l) const;

    std::vector<ThermalNode> nodes_;
    std::vector<ThermalLink> links_;
    std::vector<FanState> fans_;
    std::vector<double> flux_;
};

} // namespace gridtwin
