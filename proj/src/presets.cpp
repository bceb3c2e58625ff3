#include "gridtwin/presets.hpp"

#include <cstdlib>

#include "gridtwin/config.hpp"
#include "gridtwin/errors.hpp"

namespace gridtwin {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("GRIDTWIN_DATA"); env && *env) return env;
    return GRIDTWIN_DATA_DIR;
}

ParameterSet default_parameters() { return load_parameter_file(data_dir() / "cell_default.yaml"); }

TopologySpec cell_topology() { return {}; }

TopologySpec block_topology(int parallel, double contact) {
    TopologySpec t;
    t.kind = TopologyKind::parallel;
    t.name = "block";
    t.count = parallel;
    t.contact_r = contact;
    t.child = {cell_topology()};
    return t;
}

TopologySpec module_topology(int series, int parallel, double contact) {
    TopologySpec t;
    t.kind = TopologyKind::series;
    t.name = "module";
    t.count = series;
    t.contact_r = contact;
    t.closed = true;
    t.child = {block_topology(parallel, contact)};
    return t;
}

TopologySpec rack_topology(int modules, double contact_scale) {
    TopologySpec t;
    t.kind = TopologyKind::series;
    t.name = "rack";
    t.count = modules;
    t.contact_r = contact_module * contact_scale;
    t.child = {module_topology(20, 7, contact_cell * contact_scale)};
    return t;
}

TopologySpec container_topology(int racks, double contact_scale) {
    TopologySpec t;
    t.kind = TopologyKind::parallel;
    t.name = "compartment";
    t.count = racks;
    t.contact_r = contact_module * contact_scale;
    t.child = {rack_topology(15, contact_scale)};
    return t;
}

TopologySpec scaled_topology(int series, int parallel) {
    TopologySpec t;
    t.kind = TopologyKind::scaled;
    t.name = "scaled";
    t.scale_series = series;
    t.scale_parallel = parallel;
    t.child = {cell_topology()};
    return t;
}

namespace {

ProtocolStep cc(double rate, const std::string& label, double duration = unlimited, bool hold = false) {
    ProtocolStep s;
    s.mode = StepMode::cc;
    s.rate_c = rate;
    s.duration_s = duration;
    s.hold_slot = hold;
    s.label = label;
    return s;
}

ProtocolStep rest(double seconds, const std::string& label = "rest") {
    ProtocolStep s;
    s.mode = StepMode::rest;
    s.duration_s = seconds;
    s.label = label;
    return s;
}

} // namespace

Protocol cc_cycling(double rate_c) {
    Protocol p;
    p.steps = {cc(-rate_c, "charge"), cc(rate_c, "discharge")};
    return p;
}

Protocol cccv_cycling(double rate_c) {
    Protocol p;
    ProtocolStep charge = cc(-rate_c, "charge");
    charge.mode = StepMode::cccv;
    p.steps = {charge, cc(rate_c, "discharge")};
    return p;
}

Protocol daily_profile() {
    const double h = 3600.0;
    Protocol p;
    p.steps = {rest(4 * h),
               cc(-1.0, "charge 1C", 1 * h, true),
               rest(1 * h),
               cc(1.0, "discharge 1C", 1 * h, true),
               rest(4 * h),
               cc(-0.5, "charge C/2", 2 * h, true),
               rest(4 * h),
               cc(0.5, "discharge C/2", 2 * h, true),
               rest(5 * h)};
    return p;
}

Protocol rest_protocol(double seconds) {
    Protocol p;
    p.steps = {rest(seconds)};
    p.repeat = 1;
    return p;
}

std::vector<std::string> preset_names() {
    return {"fig5", "fig8", "contact_r", "cell2cell", "thermal", "control_week", "control_life"};
}

namespace {

// Degradation speed-up for lifetime studies run at desk scale.
constexpr double desk_acceleration = 6.0;

struct ScaleTopology {
    TopologySpec topology;
    double terminal_r = 0.0;
};

ScaleTopology scale_topology(const std::string& scale, double contact_scale = 1.0) {
    if (scale == "cell") return {cell_topology(), 0.0};
    if (scale == "block") return {block_topology(7, contact_cell * contact_scale), contact_cell * contact_scale};
    if (scale == "module") return {module_topology(20, 7, contact_cell * contact_scale), contact_module * contact_scale};
    if (scale == "rack") return {rack_topology(15, contact_scale), contact_module * contact_scale};
    if (scale == "container") return {container_topology(9, contact_scale), contact_module * contact_scale};
    throw ConfigError("unknown scale '" + scale + "' (cell, block, module, rack, container)");
}

Scenario base_scenario(const std::string& name, const PresetOptions& o) {
    Scenario s;
    s.name = name;
    s.params = default_parameters();
    s.variation.seed = o.seed;
    s.initial_soc = 0.0;
    return s;
}

void apply_overrides(Scenario& s, const PresetOptions& o) {
    if (o.cycles >= 0) s.stop.cycles = o.cycles;
    if (o.days > 0.0) s.stop.time_s = o.days * 86400.0;
    if (o.dt > 0.0) s.dt = o.dt;
}

void set_thermal(Scenario& s, ThermalMode mode, double T_c, Strategy strategy) {
    s.thermal.mode = mode;
    s.thermal.T_initial = celsius_to_kelvin(T_c);
    s.thermal.env.T_inf = celsius_to_kelvin(T_c);
    s.thermal.env.mode = AcMode::direct_air;
    s.thermal.strategy = strategy;
}

std::vector<Scenario> fig5(const PresetOptions& o) {
    std::vector<Scenario> out;
    for (double r : {0.0, 1e-3}) {
        Scenario s = base_scenario(r == 0.0 ? "fig5_no_contact" : "fig5_contact_1mohm", o);
        s.topology = block_topology(5, r);
        s.vary = true;
        s.variation.sd_degradation = 0.0;
        s.overrides = {{4, 0.5, 1.0, 1.0}};
        s.converter = false;
        s.protocol = cc_cycling(1.0);
        s.stop.cycles = 2;
        s.logging.trace_every_s = 2.0;
        apply_overrides(s, o);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> fig8(const PresetOptions& o) {
    Scenario s = base_scenario("fig8", o);
    s.topology = block_topology(5, 0.0);
    s.topology.closed = true;
    s.vary = true;
    s.variation.sd_degradation = 0.0;
    s.overrides = {{4, 0.5, 1.0, 1.0}};
    set_thermal(s, ThermalMode::coupled, 20.0, Strategy::always_on);
    s.protocol = cc_cycling(1.0);
    s.stop.cycles = 5;
    s.logging.temperature_every_s = 10.0;
    apply_overrides(s, o);
    return {s};
}

std::vector<Scenario> contact_r(const PresetOptions& o) {
    std::vector<Scenario> out;
    const ScaleTopology nominal = scale_topology(o.scale);
    struct Variant {
        const char* name;
        double scale;
        bool scaled;
    };
    for (const Variant& v : {Variant{"one_cell", 1.0, true}, Variant{"contact_r", 1.0, false},
                             Variant{"high_contact_r", 10.0, false}}) {
        Scenario s = base_scenario(std::string("contact_r_") + v.name, o);
        if (v.scaled) {
            s.topology = scaled_topology(nominal.topology.series_count(), nominal.topology.parallel_count());
        } else {
            const ScaleTopology t = scale_topology(o.scale, v.scale);
            s.topology = t.topology;
            s.terminal_r = t.terminal_r;
        }
        s.degradation_acceleration = desk_acceleration;
        s.protocol = cc_cycling(1.0);
        s.stop.cycles = 500;
        s.logging.capacity_every = 25;
        s.dt = 10.0;
        apply_overrides(s, o);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> cell2cell(const PresetOptions& o) {
    std::vector<Scenario> out;
    struct Variant {
        const char* name;
        bool capacity, resistance, degradation;
    };
    for (const Variant& v :
         {Variant{"identical", false, false, false}, Variant{"capacity", true, false, false},
          Variant{"resistance", false, true, false}, Variant{"capacity_resistance", true, true, false},
          Variant{"degradation", false, false, true}, Variant{"all", true, true, true}}) {
        Scenario s = base_scenario(std::string("cell2cell_") + v.name, o);
        const ScaleTopology t = scale_topology(o.scale);
        s.topology = t.topology;
        s.terminal_r = t.terminal_r;
        s.vary = v.capacity || v.resistance || v.degradation;
        if (!v.capacity) s.variation.sd_capacity = 0.0;
        if (!v.resistance) s.variation.sd_resistance = 0.0;
        if (!v.degradation) s.variation.sd_degradation = 0.0;
        s.degradation_acceleration = desk_acceleration;
        s.protocol = cc_cycling(1.0);
        s.stop.cycles = 1000;
        s.logging.capacity_every = 50;
        s.dt = 10.0;
        apply_overrides(s, o);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> thermal(const PresetOptions& o) {
    std::vector<Scenario> out;
    struct Variant {
        const char* name;
        ThermalMode mode;
    };
    for (const Variant& v : {Variant{"isothermal", ThermalMode::isothermal},
                             Variant{"individual_cell", ThermalMode::individual_cell},
                             Variant{"coupled", ThermalMode::coupled}}) {
        Scenario s = base_scenario(std::string("thermal_") + v.name, o);
        const ScaleTopology t = scale_topology(o.scale);
        s.topology = t.topology;
        s.terminal_r = t.terminal_r;
        s.vary = true;
        set_thermal(s, v.mode, 25.0, Strategy::always_on);
        s.degradation_acceleration = desk_acceleration;
        s.protocol = cc_cycling(1.0);
        s.stop.cycles = 20;
        s.logging.capacity_every = 10;
        s.logging.temperature_every_s = 60.0;
        s.dt = 5.0;
        apply_overrides(s, o);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Scenario> control(const PresetOptions& o, bool life) {
    std::vector<Scenario> out;
    for (int k = 1; k <= 5; ++k) {
        const Strategy strategy = parse_strategy(std::to_string(k));
        Scenario s = base_scenario((life ? "control_life_" : "control_week_") + strategy_name(strategy), o);
        const ScaleTopology t = scale_topology(o.scale);
        s.topology = t.topology;
        s.terminal_r = t.terminal_r;
        s.vary = true;
        set_thermal(s, ThermalMode::coupled, 15.0, strategy);
        s.protocol = daily_profile();
        s.stop.time_s = (life ? 365.0 : 7.0) * 86400.0;
        s.balancing.period_s = 7.0 * 86400.0;
        s.logging.temperature_every_s = life ? 3600.0 : 300.0;
        s.logging.capacity_every = life ? 14 : 0;
        s.dt = 5.0;
        s.dt_rest = 60.0;
        if (life) s.degradation_acceleration = desk_acceleration;
        apply_overrides(s, o);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

std::vector<Scenario> make_preset(const std::string& name, const PresetOptions& o) {
    if (name == "fig5") return fig5(o);
    if (name == "fig8") return fig8(o);
    if (name == "contact_r") return contact_r(o);
    if (name == "cell2cell") return cell2cell(o);
    if (name == "thermal") return thermal(o);
    if (name == "control_week") return control(o, false);
    if (name == "control_life") return control(o, true);
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

} // namespace gridtwin
