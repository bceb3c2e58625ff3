#include "gridtwin/scenario.hpp"

#include "gridtwin/errors.hpp"

namespace gridtwin {

void ThermalCoefficients::validate() const {
    if (h_cell_cell < 0.0 || h_wall < 0.0 || convective_fraction < 0.0 || group_exterior_area < 0.0 ||
        container_wall < 0.0 || chiller_power < 0.0)
        throw ConfigError("thermal coefficients must be non-negative");
    if (!(group_heat_capacity > 0.0) || !(container_heat_capacity > 0.0))
        throw ConfigError("thermal heat capacities must be positive");
}

std::size_t TopologySpec::cell_count() const {
    switch (kind) {
    case TopologyKind::cell: return 1;
    case TopologyKind::scaled:
        return static_cast<std::size_t>(scale_series) * static_cast<std::size_t>(scale_parallel) *
               child.front().cell_count();
    default: return static_cast<std::size_t>(count) * child.front().cell_count();
    }
}

std::size_t TopologySpec::model_cells() const {
    switch (kind) {
    case TopologyKind::cell: return 1;
    case TopologyKind::scaled: return child.front().model_cells();
    default: return static_cast<std::size_t>(count) * child.front().model_cells();
    }
}

int TopologySpec::series_count() const {
    switch (kind) {
    case TopologyKind::cell: return 1;
    case TopologyKind::scaled: return scale_series * child.front().series_count();
    case TopologyKind::series: return count * child.front().series_count();
    case TopologyKind::parallel: return child.front().series_count();
    }
    return 1;
}

int TopologySpec::parallel_count() const {
    switch (kind) {
    case TopologyKind::cell: return 1;
    case TopologyKind::scaled: return scale_parallel * child.front().parallel_count();
    case TopologyKind::series: return child.front().parallel_count();
    case TopologyKind::parallel: return count * child.front().parallel_count();
    }
    return 1;
}

void TopologySpec::validate() const {
    if (kind == TopologyKind::cell) {
        if (!child.empty()) throw ConfigError("a cell level cannot have children");
        return;
    }
    if (child.size() != 1) throw ConfigError("topology level '" + name + "' needs one child level");
    if (kind == TopologyKind::parallel && count < 2) throw ConfigError("parallel level needs count >= 2");
    if (kind == TopologyKind::series && count < 1) throw ConfigError("series level needs count >= 1");
    if (kind == TopologyKind::scaled && (scale_series < 1 || scale_parallel < 1))
        throw ConfigError("scaled level needs positive multipliers");
    if (contact_r < 0.0) throw ConfigError("contact resistance must be non-negative");
    if (!contact_list.empty() && kind != TopologyKind::scaled &&
        contact_list.size() != static_cast<std::size_t>(count))
        throw ConfigError("contact list length must equal the child count");
    child.front().validate();
}

void Protocol::validate() const {
    if (steps.empty()) throw ConfigError("protocol has no steps");
    for (const ProtocolStep& s : steps) {
        if (s.mode != StepMode::rest && s.rate_c == 0.0) throw ConfigError("non-rest step needs a nonzero rate");
        if (s.mode == StepMode::rest && !(s.duration_s < unlimited)) throw ConfigError("rest step needs a duration");
        if (s.mode == StepMode::cccv && !(s.i_cutoff_c > 0.0)) throw ConfigError("CCCV step needs a current cutoff");
        if (!(s.duration_s > 0.0)) throw ConfigError("step duration must be positive");
        if (s.hold_slot && !(s.duration_s < unlimited)) throw ConfigError("slot steps need a duration");
    }
}

void Scenario::validate() const {
    params.cell.validate();
    if (!params.ocv) throw ConfigError("OCV tables not loaded");
    params.ocv->validate();
    params.fan_per_cell.validate();
    params.ac.validate();
    params.thermal.validate();
    topology.validate();
    if (vary) variation.validate();
    protocol.validate();
    thermal.thresholds.validate();
    if (!(dt > 0.0) || dt_rest < 0.0 || !(capacity_dt > 0.0)) throw ConfigError("time steps must be positive");
    if (initial_soc < 0.0 || initial_soc > 1.0) throw ConfigError("initial_soc must lie in [0, 1]");
    if (terminal_r < 0.0) throw ConfigError("terminal resistance must be non-negative");
    if (!(pi_tolerance > 0.0) || pi_k_p <= 0.0 || pi_k_i < 0.0 || pi_max_iterations < 1)
        throw ConfigError("invalid parallel-split controller settings");
    if (!(thermal.T_initial > 0.0) || !(thermal.env.T_inf > 0.0)) throw ConfigError("temperatures must be positive");
    for (const CellOverride& o : overrides)
        if (o.index >= topology.model_cells()) throw ConfigError("cell override index out of range");
}

} // namespace gridtwin
