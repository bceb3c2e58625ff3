#include "gridtwin/config.hpp"

#include <set>
#include <string>
#include <utility>

#include <yaml-cpp/yaml.h>

#include "gridtwin/errors.hpp"
#include "gridtwin/presets.hpp"

namespace gridtwin {

namespace fs = std::filesystem;

double balanced_cathode_empty(const CellParams& p) {
    const double moved = (p.x_n_100 - p.x_n_0) * p.c_n_max * p.eps_n0 * p.A_n * p.tau_n;
    return p.y_p_100 + moved / (p.c_p_max * p.eps_p0 * p.A_p * p.tau_p);
}

namespace {

std::string where(const YAML::Node& n, const std::string& field) {
    const YAML::Mark m = n.Mark();
    std::string s = "field '" + field + "'";
    if (m.line >= 0) s += " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
    return s;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
    throw ConfigError(where(n, field) + ": " + msg);
}

// Reads known keys from one mapping and rejects the rest.
class Block {
public:
    Block(YAML::Node node, std::string context) : node_(std::move(node)), ctx_(std::move(context)) {
        if (node_ && !node_.IsMap()) fail(node_, ctx_, "expected a mapping");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_ && node_[key];
    }
    YAML::Node get(const std::string& key) {
        seen_.insert(key);
        return node_ ? node_[key] : YAML::Node();
    }
    std::string field(const std::string& key) const { return ctx_.empty() ? key : ctx_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out) {
        if (!has(key)) return;
        const YAML::Node v = node_[key];
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            fail(v, field(key), "cannot read value '" + (v.IsScalar() ? v.Scalar() : std::string("<non-scalar>")) + "'");
        }
    }
    void read_positive(const std::string& key, double& out) {
        read(key, out);
        if (has(key) && !(out > 0.0)) fail(node_[key], field(key), "must be positive");
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            // Merged maps rebuild their keys without a source mark; the value keeps one.
            if (!seen_.count(key)) fail(kv.first.Mark().line >= 0 ? kv.first : kv.second, field(key), "unknown key");
        }
    }

    const YAML::Node& node() const { return node_; }

private:
    YAML::Node node_;
    std::string ctx_;
    std::set<std::string> seen_;
};

YAML::Node merge(YAML::Node base, const YAML::Node& over) {
    if (!base || !base.IsMap() || !over.IsMap()) return over;
    for (const auto& kv : over) {
        const std::string key = kv.first.as<std::string>();
        base[key] = merge(base[key], kv.second);
    }
    return base;
}

void absolutize(YAML::Node n, const fs::path& dir) {
    if (n && n.IsScalar()) n = (dir / n.as<std::string>()).lexically_normal().string();
}

YAML::Node load_yaml(const fs::path& path, int depth = 0) {
    if (depth > 16) throw ConfigError("include depth exceeded at " + path.string());
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    YAML::Node root;
    try {
        root = YAML::LoadFile(path.string());
    } catch (const YAML::ParserException& e) {
        throw ConfigError(path.string() + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    } catch (const YAML::Exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(path.string() + ": top level must be a mapping");
    const fs::path dir = path.parent_path();
    if (root["ocv"] && root["ocv"].IsMap())
        for (const char* k : {"anode", "cathode", "entropic"}) absolutize(root["ocv"][k], dir);
    if (root["parameters"] && root["parameters"].IsScalar()) absolutize(root["parameters"], dir);

    YAML::Node result(YAML::NodeType::Map);
    if (const YAML::Node inc = root["include"]) {
        std::vector<std::string> files;
        if (inc.IsScalar()) files.push_back(inc.as<std::string>());
        else if (inc.IsSequence())
            for (const auto& f : inc) files.push_back(f.as<std::string>());
        else fail(inc, "include", "expected a file name or a list of file names");
        for (const auto& f : files) result = merge(result, load_yaml(dir / f, depth + 1));
        root.remove("include");
    }
    return merge(result, root);
}

const char* const parameter_keys[] = {"cell", "sei", "stress", "ocv", "fan", "ac", "thermal_coefficients"};

ParameterSet parameters_from(const YAML::Node& root) {
    ParameterSet ps;
    CellParams& c = ps.cell;
    {
        Block b(root["cell"], "cell");
        const std::pair<const char*, double*> fields[] = {
            {"D_n_ref", &c.D_n_ref}, {"D_p_ref", &c.D_p_ref}, {"E_Dn", &c.E_Dn}, {"E_Dp", &c.E_Dp},
            {"k_n_ref", &c.k_n_ref}, {"k_p_ref", &c.k_p_ref}, {"E_kn", &c.E_kn}, {"E_kp", &c.E_kp},
            {"R_n", &c.R_n}, {"R_p", &c.R_p}, {"eps_n0", &c.eps_n0}, {"eps_p0", &c.eps_p0},
            {"A_n", &c.A_n}, {"A_p", &c.A_p}, {"tau_n", &c.tau_n}, {"tau_p", &c.tau_p},
            {"c_n_max", &c.c_n_max}, {"c_p_max", &c.c_p_max}, {"c_el", &c.c_el}, {"alpha", &c.alpha},
            {"rho_cell", &c.rho_cell}, {"A_cell", &c.A_cell}, {"tau_cell", &c.tau_cell}, {"Cp_cell", &c.Cp_cell},
            {"r_dc_n", &c.r_dc_n}, {"r_dc_p", &c.r_dc_p}, {"T_ref", &c.T_ref}, {"V_min", &c.V_min},
            {"V_max", &c.V_max}, {"V_nom", &c.V_nom}, {"Q_nom", &c.Q_nom}, {"x_n_0", &c.x_n_0},
            {"x_n_100", &c.x_n_100}, {"y_p_100", &c.y_p_100}, {"eps_floor_fraction", &c.eps_floor_fraction}};
        for (const auto& [k, p] : fields) b.read(k, *p);
        b.read("shells", c.shells);
        if (b.has("y_p_0")) b.read("y_p_0", c.y_p_0);
        else c.y_p_0 = balanced_cathode_empty(c);
        b.finish();
    }
    {
        SeiParams& s = c.sei;
        Block b(root["sei"], "sei");
        const std::pair<const char*, double*> fields[] = {
            {"k_sei_ref", &s.k_sei_ref}, {"E_ksei", &s.E_ksei}, {"D_sei_ref", &s.D_sei_ref}, {"E_Dsei", &s.E_Dsei},
            {"alpha_sei", &s.alpha_sei}, {"U_sei", &s.U_sei}, {"v_sei", &s.v_sei}, {"v_li", &s.v_li},
            {"beta_1", &s.beta_1}, {"r_dc_sei", &s.r_dc_sei}, {"tau_sei0", &s.tau_sei0}};
        for (const auto& [k, p] : fields) b.read(k, *p);
        b.finish();
    }
    {
        StressParams& s = c.stress;
        Block b(root["stress"], "stress");
        const std::pair<const char*, double*> fields[] = {
            {"Omega_n", &s.Omega_n}, {"Omega_p", &s.Omega_p}, {"Y_n", &s.Y_n}, {"Y_p", &s.Y_p},
            {"nu_n", &s.nu_n}, {"nu_p", &s.nu_p}, {"sigma_yield_n", &s.sigma_yield_n},
            {"sigma_yield_p", &s.sigma_yield_p}, {"beta_2", &s.beta_2}, {"m", &s.m}};
        for (const auto& [k, p] : fields) b.read(k, *p);
        b.finish();
    }
    {
        Block b(root["ocv"], "ocv");
        std::string anode, cathode, entropic;
        b.read("anode", anode);
        b.read("cathode", cathode);
        b.read("entropic", entropic);
        b.finish();
        if (anode.empty() || cathode.empty() || entropic.empty())
            throw ConfigError("field 'ocv': anode, cathode and entropic tables are required");
        try {
            ps.ocv = std::make_shared<const OcvTables>(load_ocv_tables(anode, cathode, entropic));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("field 'ocv': ") + e.what());
        }
    }
    {
        FanParams& f = ps.fan_per_cell;
        Block b(root["fan"], "fan");
        b.read("A_fan", f.A_fan);
        b.read("flow_nom", f.flow_nom);
        b.read("eta_fan", f.eta_fan);
        b.read("rho_air", f.rho_air);
        b.read("cp_air", f.cp_air);
        b.finish();
    }
    {
        Block b(root["ac"], "ac");
        b.read("cop", ps.ac.cop);
        b.read("P_nom", ps.ac.P_nom);
        b.finish();
    }
    if (root["converter"] && root["converter"].IsMap()) {
        ConverterReference& r = ps.converter;
        Block b(root["converter"], "converter");
        const std::pair<const char*, double*> fields[] = {
            {"rating_ref", &r.rating_ref}, {"V_bus_ref", &r.V_bus_ref}, {"V_sc_ref", &r.V_sc_ref},
            {"f_sw", &r.f_sw}, {"E_on_ref", &r.E_on_ref}, {"E_off_ref", &r.E_off_ref},
            {"R_dcdc_ref", &r.R_dcdc_ref}, {"R_bus_ref", &r.R_bus_ref}, {"R_ac_ref", &r.R_ac_ref},
            {"D2", &r.D2}, {"rating_factor", &r.rating_factor}, {"bus_factor", &r.bus_factor}};
        for (const auto& [k, p] : fields) b.read(k, *p);
        b.finish();
    }
    {
        ThermalCoefficients& t = ps.thermal;
        Block b(root["thermal_coefficients"], "thermal_coefficients");
        const std::pair<const char*, double*> fields[] = {
            {"h_cell_cell", &t.h_cell_cell}, {"h_wall", &t.h_wall}, {"convective_fraction", &t.convective_fraction},
            {"group_heat_capacity", &t.group_heat_capacity}, {"group_exterior_area", &t.group_exterior_area},
            {"container_heat_capacity", &t.container_heat_capacity}, {"container_wall", &t.container_wall},
            {"chiller_power", &t.chiller_power}};
        for (const auto& [k, p] : fields) b.read(k, *p);
        b.finish();
    }
    ps.cell.validate();
    ps.fan_per_cell.validate();
    ps.ac.validate();
    ps.thermal.validate();
    return ps;
}

TopologySpec parse_topology(const YAML::Node& n, const std::string& ctx) {
    if (n.IsScalar()) {
        const std::string s = n.as<std::string>();
        if (s == "cell") return cell_topology();
        if (s == "block") return block_topology();
        if (s == "module") return module_topology();
        if (s == "rack") return rack_topology();
        if (s == "container") return container_topology();
        fail(n, ctx, "unknown topology '" + s + "' (cell, block, module, rack, container)");
    }
    Block b(n, ctx);
    TopologySpec t;
    std::string kind = "cell";
    b.read("kind", kind);
    if (kind == "cell") t.kind = TopologyKind::cell;
    else if (kind == "series") t.kind = TopologyKind::series;
    else if (kind == "parallel") t.kind = TopologyKind::parallel;
    else if (kind == "scaled") t.kind = TopologyKind::scaled;
    else fail(b.get("kind"), b.field("kind"), "expected cell, series, parallel or scaled");
    b.read("name", t.name);
    b.read("count", t.count);
    b.read("contact_r", t.contact_r);
    b.read("contacts", t.contact_list);
    b.read("closed", t.closed);
    b.read("scale_series", t.scale_series);
    b.read("scale_parallel", t.scale_parallel);
    if (b.has("child")) t.child = {parse_topology(b.get("child"), b.field("child"))};
    else if (t.kind != TopologyKind::cell) t.child = {cell_topology()};
    b.finish();
    try {
        t.validate();
    } catch (const ConfigError& e) {
        fail(n, ctx, e.what());
    }
    return t;
}

StepMode parse_mode(const YAML::Node& n, const std::string& ctx) {
    const std::string s = n.as<std::string>();
    if (s == "rest") return StepMode::rest;
    if (s == "cc" || s == "CC") return StepMode::cc;
    if (s == "cccv" || s == "CCCV") return StepMode::cccv;
    fail(n, ctx, "expected rest, cc or cccv");
}

Protocol parse_protocol(const YAML::Node& n, const std::string& ctx, double one_c) {
    if (n.IsScalar()) {
        const std::string s = n.as<std::string>();
        if (s == "daily") return daily_profile();
        if (s == "cc_cycling") return cc_cycling(1.0);
        if (s == "cccv_cycling") return cccv_cycling(1.0);
        fail(n, ctx, "unknown protocol '" + s + "' (daily, cc_cycling, cccv_cycling)");
    }
    Block b(n, ctx);
    Protocol p;
    b.read("repeat", p.repeat);
    const YAML::Node steps = b.get("steps");
    if (!steps || !steps.IsSequence()) fail(n, b.field("steps"), "a list of steps is required");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string sctx = b.field("steps[" + std::to_string(i) + "]");
        Block s(steps[i], sctx);
        ProtocolStep st;
        if (!s.has("mode")) fail(steps[i], sctx, "mode is required");
        st.mode = parse_mode(s.get("mode"), s.field("mode"));
        s.read("rate_c", st.rate_c);
        if (s.has("rate_a")) {
            double a = 0.0;
            s.read("rate_a", a);
            st.rate_c = a / one_c;
        }
        s.read("duration_s", st.duration_s);
        if (s.has("duration_h")) {
            double h = 0.0;
            s.read("duration_h", h);
            st.duration_s = h * 3600.0;
        }
        s.read("v_limit", st.v_limit);
        s.read("i_cutoff_c", st.i_cutoff_c);
        if (s.has("i_cutoff_a")) {
            double a = 0.0;
            s.read("i_cutoff_a", a);
            st.i_cutoff_c = a / one_c;
        }
        s.read("hold", st.hold_slot);
        s.read("label", st.label);
        s.finish();
        p.steps.push_back(st);
    }
    b.finish();
    try {
        p.validate();
    } catch (const ConfigError& e) {
        fail(n, ctx, e.what());
    }
    return p;
}

double read_celsius(Block& b, const std::string& key, double fallback_k) {
    double c = kelvin_to_celsius(fallback_k);
    b.read(key, c);
    return celsius_to_kelvin(c);
}

void apply_scenario(const YAML::Node& root, Scenario& sc, bool parameters_changed, const YAML::Node& params) {
    Block b(root, "");
    b.get("preset");
    b.get("scale");
    b.get("parameters");
    for (const char* k : parameter_keys) b.get(k);
    if (parameters_changed) sc.params = parameters_from(params);

    b.read("name", sc.name);
    if (b.has("seed")) b.read("seed", sc.variation.seed);
    if (b.has("topology")) sc.topology = parse_topology(b.get("topology"), "topology");
    b.read("terminal_r", sc.terminal_r);
    b.read("initial_soc", sc.initial_soc);
    b.read_positive("dt", sc.dt);
    b.read("dt_rest", sc.dt_rest);
    b.read("degradation", sc.degradation);
    b.read("degradation_acceleration", sc.degradation_acceleration);
    b.read("checkpoint_every", sc.checkpoint_every);
    if (b.has("converter")) {
        const YAML::Node c = b.get("converter");
        if (c.IsScalar()) b.read("converter", sc.converter);
        // A mapping is a parameter block, already consumed above.
    }
    if (b.has("variation")) {
        Block v(b.get("variation"), "variation");
        sc.vary = true;
        v.read("enabled", sc.vary);
        v.read("sd_capacity", sc.variation.sd_capacity);
        v.read("sd_resistance", sc.variation.sd_resistance);
        v.read("sd_degradation", sc.variation.sd_degradation);
        v.read("rho", sc.variation.rho);
        v.read("seed", sc.variation.seed);
        v.finish();
    }
    if (b.has("overrides")) {
        const YAML::Node list = b.get("overrides");
        if (!list.IsSequence()) fail(list, "overrides", "expected a list");
        sc.overrides.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            Block o(list[i], "overrides[" + std::to_string(i) + "]");
            CellOverride co;
            int cell = 0;
            o.read("cell", cell);
            if (cell < 1) fail(list[i], o.field("cell"), "1-based cell index required");
            co.index = static_cast<std::size_t>(cell - 1);
            o.read("capacity", co.capacity);
            o.read("resistance", co.resistance);
            o.read("degradation", co.degradation);
            o.finish();
            sc.overrides.push_back(co);
        }
    }
    if (b.has("thermal")) {
        Block t(b.get("thermal"), "thermal");
        if (t.has("mode")) {
            const std::string m = t.get("mode").as<std::string>();
            if (m == "isothermal") sc.thermal.mode = ThermalMode::isothermal;
            else if (m == "individual_cell") sc.thermal.mode = ThermalMode::individual_cell;
            else if (m == "coupled") sc.thermal.mode = ThermalMode::coupled;
            else fail(t.get("mode"), "thermal.mode", "expected isothermal, individual_cell or coupled");
        }
        sc.thermal.T_initial = read_celsius(t, "T_initial_c", sc.thermal.T_initial);
        sc.thermal.env.T_inf = read_celsius(t, "T_inf_c", sc.thermal.env.T_inf);
        if (t.has("ac_mode")) {
            const std::string m = t.get("ac_mode").as<std::string>();
            if (m == "direct_air") sc.thermal.env.mode = AcMode::direct_air;
            else if (m == "chiller") sc.thermal.env.mode = AcMode::chiller;
            else fail(t.get("ac_mode"), "thermal.ac_mode", "expected direct_air or chiller");
        }
        if (t.has("strategy")) {
            try {
                sc.thermal.strategy = parse_strategy(t.get("strategy").as<std::string>());
            } catch (const std::exception& e) {
                fail(t.get("strategy"), "thermal.strategy", e.what());
            }
        }
        if (t.has("thresholds_c")) {
            Block h(t.get("thresholds_c"), "thermal.thresholds_c");
            ControlThresholds& c = sc.thermal.thresholds;
            const std::pair<const char*, double*> fields[] = {
                {"fan_on", &c.fan_on}, {"fan_off", &c.fan_off}, {"fan_band_low", &c.fan_band_low},
                {"fan_band_high", &c.fan_band_high}, {"ac_on", &c.ac_on}, {"ac_off", &c.ac_off},
                {"ac_hot_on", &c.ac_hot_on}, {"ac_band_low", &c.ac_band_low}, {"ac_band_high", &c.ac_band_high},
                {"ac_hot_band_low", &c.ac_hot_band_low}, {"ac_hot_band_high", &c.ac_hot_band_high},
                {"ac_gate", &c.ac_gate}};
            for (const auto& [k, p] : fields) *p = read_celsius(h, k, *p);
            h.finish();
        }
        t.finish();
    }
    if (b.has("protocol"))
        sc.protocol = parse_protocol(b.get("protocol"), "protocol",
                                     sc.params.cell.one_c_current() * sc.topology.parallel_count());
    if (b.has("stop")) {
        Block s(b.get("stop"), "stop");
        s.read("cycles", sc.stop.cycles);
        s.read("time_s", sc.stop.time_s);
        if (s.has("days")) {
            double d = 0.0;
            s.read("days", d);
            sc.stop.time_s = d * 86400.0;
        }
        s.read("fec", sc.stop.fec);
        s.read("capacity_floor", sc.stop.capacity_floor);
        s.read("wall_clock_s", sc.stop.wall_clock_s);
        s.read("end_of_life", sc.stop.end_of_life);
        s.finish();
    }
    if (b.has("logging")) {
        Block l(b.get("logging"), "logging");
        l.read("capacity_every", sc.logging.capacity_every);
        l.read("capacity_at_start", sc.logging.capacity_at_start);
        l.read("temperature_every_s", sc.logging.temperature_every_s);
        l.read("trace_every_s", sc.logging.trace_every_s);
        l.finish();
    }
    if (b.has("balancing")) {
        Block l(b.get("balancing"), "balancing");
        l.read("period_s", sc.balancing.period_s);
        if (l.has("period_days")) {
            double d = 0.0;
            l.read("period_days", d);
            sc.balancing.period_s = d * 86400.0;
        }
        l.read("current_c", sc.balancing.current_c);
        l.read("tolerance_v", sc.balancing.tolerance_v);
        l.finish();
    }
    if (b.has("solver")) {
        Block l(b.get("solver"), "solver");
        l.read("k_p", sc.pi_k_p);
        l.read("k_i", sc.pi_k_i);
        l.read("tolerance", sc.pi_tolerance);
        l.read("max_iterations", sc.pi_max_iterations);
        l.read_positive("capacity_dt", sc.capacity_dt);
        l.finish();
    }
    b.finish();
}

} // namespace

ParameterSet load_parameter_file(const fs::path& path) { return parameters_from(load_yaml(path)); }

std::vector<Scenario> load_config(const fs::path& path) {
    const YAML::Node root = load_yaml(path);
    YAML::Node params = load_yaml(data_dir() / "cell_default.yaml");
    bool changed = false;
    if (const YAML::Node p = root["parameters"]) {
        if (p.IsScalar()) params = merge(params, load_yaml(p.as<std::string>()));
        else if (p.IsMap()) params = merge(params, p);
        else fail(p, "parameters", "expected a file name or a mapping");
        changed = true;
    }
    for (const char* k : parameter_keys)
        if (root[k]) {
            YAML::Node one(YAML::NodeType::Map);
            one[k] = root[k];
            params = merge(params, one);
            changed = true;
        }
    if (root["converter"] && root["converter"].IsMap()) {
        YAML::Node one(YAML::NodeType::Map);
        one["converter"] = root["converter"];
        params = merge(params, one);
        changed = true;
    }

    std::vector<Scenario> out;
    if (const YAML::Node preset = root["preset"]) {
        PresetOptions o;
        if (root["scale"]) o.scale = root["scale"].as<std::string>();
        if (root["seed"]) o.seed = root["seed"].as<std::uint64_t>();
        try {
            out = make_preset(preset.as<std::string>(), o);
        } catch (const ConfigError& e) {
            fail(preset, "preset", e.what());
        }
    } else {
        Scenario s;
        s.params = default_parameters();
        s.name = path.stem().string();
        out.push_back(std::move(s));
    }
    for (Scenario& s : out) {
        const std::string variant = s.name;
        apply_scenario(root, s, changed, params);
        if (out.size() > 1) s.name = root["name"] ? root["name"].as<std::string>() + "_" + variant : variant;
        try {
            s.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return out;
}

} // namespace gridtwin
