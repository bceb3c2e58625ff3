#include "gridtwin/thermal_control.hpp"

#include <algorithm>

#include "gridtwin/errors.hpp"

namespace gridtwin {

Strategy parse_strategy(const std::string& name) {
    if (name == "always_on" || name == "1") return Strategy::always_on;
    if (name == "local_on_off" || name == "2") return Strategy::local_on_off;
    if (name == "hotspot_on_off" || name == "3") return Strategy::hotspot_on_off;
    if (name == "proportional_local" || name == "4") return Strategy::proportional_local;
    if (name == "proportional_hotspot" || name == "5") return Strategy::proportional_hotspot;
    throw ConfigError("unknown control strategy: " + name);
}

std::string strategy_name(Strategy s) {
    switch (s) {
    case Strategy::always_on: return "always_on";
    case Strategy::local_on_off: return "local_on_off";
    case Strategy::hotspot_on_off: return "hotspot_on_off";
    case Strategy::proportional_local: return "proportional_local";
    case Strategy::proportional_hotspot: return "proportional_hotspot";
    }
    return "unknown";
}

void ControlThresholds::validate() const {
    if (!(fan_on > fan_off) || !(ac_on > ac_off) || !(ac_hot_on > ac_off))
        throw ConfigError("hysteresis on-threshold must exceed off-threshold");
    if (!(fan_band_high > fan_band_low) || !(ac_band_high > ac_band_low) || !(ac_hot_band_high > ac_hot_band_low))
        throw ConfigError("proportional bands must have positive width");
}

namespace {

double ramp(double T, double low, double high) { return std::clamp((T - low) / (high - low), 0.0, 1.0); }

double hysteresis(bool on_condition, bool off_condition, Latch& latch) {
    if (!latch.on && on_condition) latch.on = true;
    else if (latch.on && off_condition) latch.on = false;
    return latch.on ? 1.0 : 0.0;
}

} // namespace

double fan_command(Strategy s, const ControlThresholds& c, double T_local, double T_hot, Latch& latch) {
    switch (s) {
    case Strategy::always_on: return 1.0;
    case Strategy::local_on_off: return hysteresis(T_local > c.fan_on, T_local < c.fan_off, latch);
    case Strategy::hotspot_on_off: return hysteresis(T_hot > c.fan_on, T_hot < c.fan_off, latch);
    case Strategy::proportional_local: return ramp(T_local, c.fan_band_low, c.fan_band_high);
    case Strategy::proportional_hotspot: return ramp(T_hot, c.fan_band_low, c.fan_band_high);
    }
    return 0.0;
}

double ac_command(Strategy s, const ControlThresholds& c, double T_local, double T_hot, Latch& latch) {
    switch (s) {
    case Strategy::always_on: return T_local < c.ac_gate ? 0.0 : 1.0;
    case Strategy::local_on_off: return hysteresis(T_local > c.ac_on, T_local < c.ac_off, latch);
    case Strategy::hotspot_on_off: return hysteresis(T_hot > c.ac_hot_on, T_local < c.ac_off, latch);
    case Strategy::proportional_local: return ramp(T_local, c.ac_band_low, c.ac_band_high);
    case Strategy::proportional_hotspot:
        return T_local > c.ac_gate ? ramp(T_hot, c.ac_hot_band_low, c.ac_hot_band_high) : 0.0;
    }
    return 0.0;
}

} // namespace gridtwin
