#pragma once

#include <string>

#include "gridtwin/physics.hpp"

namespace gridtwin {

enum class Strategy { always_on, local_on_off, hotspot_on_off, proportional_local, proportional_hotspot };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct ControlThresholds {
    double fan_on = celsius_to_kelvin(35.0);
    double fan_off = celsius_to_kelvin(25.0);
    double fan_band_low = celsius_to_kelvin(25.0);
    double fan_band_high = celsius_to_kelvin(35.0);
    double ac_on = celsius_to_kelvin(25.0);
    double ac_off = celsius_to_kelvin(20.0);
    double ac_hot_on = celsius_to_kelvin(30.0);
    double ac_band_low = celsius_to_kelvin(20.0);
    double ac_band_high = celsius_to_kelvin(25.0);
    double ac_hot_band_low = celsius_to_kelvin(25.0);
    double ac_hot_band_high = celsius_to_kelvin(30.0);
    double ac_gate = celsius_to_kelvin(20.0);

    void validate() const;
};

struct Latch {
    bool on = false;
};

double fan_command(Strategy s, const ControlThresholds& c, double T_local, double T_hot, Latch& latch);
double ac_command(Strategy s, const ControlThresholds& c, double T_local, double T_hot, Latch& latch);

} // namespace gridtwin
