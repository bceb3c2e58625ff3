#include "gridtwin/ancillary.hpp"

#include <algorithm>
#include <cmath>

#include "gridtwin/errors.hpp"

namespace gridtwin {

void FanParams::validate() const {
    if (!(A_fan > 0.0 && flow_nom > 0.0 && eta_fan > 0.0 && rho_air > 0.0 && cp_air > 0.0 && P_nom >= 0.0))
        throw ConfigError("invalid fan parameters");
}

FanParams scale_fan(const FanParams& per_cell, double n) {
    FanParams f = per_cell;
    f.A_fan *= n;
    f.flow_nom *= n;
    const double v = f.v_nom();
    f.P_nom = f.rho_air * f.A_fan * v * v * v / f.eta_fan;
    return f;
}

double fan_convection(double v) {
    if (v < 0.0) throw DomainError("negative air speed");
    return 12.12 - 1.16 * v + 11.6 * std::sqrt(v);
}

double fan_power(double v, const FanParams& p) {
    if (v < 0.0) throw DomainError("negative air speed");
    const double P = p.rho_air * p.A_fan * v * v * v / p.eta_fan;
    return p.P_nom > 0.0 ? std::min(P, p.P_nom) : P;
}

double fan_speed_for_command(double u, const FanParams& p) {
    return p.v_nom() * std::cbrt(std::clamp(u, 0.0, 1.0));
}

void AcParams::validate() const {
    if (!(cop > 0.0) || P_nom < 0.0) throw ConfigError("invalid AC parameters");
}

AcPower ac_power(double demand, double T_hot, double T_cold, const Environment& env, const AcParams& ac,
                 const FanParams& fan) {
    if (demand < 0.0) throw DomainError("negative cooling demand");
    if (demand == 0.0) return {0.0, true};
    if (env.mode == AcMode::chiller) return {demand / ac.cop, true};
    if (T_hot <= T_cold) return {0.0, false};
    const double mass_flow = demand / (fan.cp_air * (T_hot - T_cold));
    const double v = mass_flow / (fan.rho_air * fan.A_fan);
    return {fan_power(v, fan), true};
}

void ConverterParams::validate() const {
    if (V_sc < 0.0 || f_sw < 0.0 || E_on < 0.0 || E_off < 0.0 || R_dcdc < 0.0 || R_bus < 0.0 || R_ac < 0.0)
        throw ConfigError("converter loss coefficients must be non-negative");
    if (!(V_bus > 0.0) || !(rating > 0.0)) throw ConfigError("converter bus voltage and rating must be positive");
    if (D2 < 0.0 || D2 > 1.0) throw ConfigError("modulation ratio must lie in [0, 1]");
}

ConverterParams scale_converter(const ConverterReference& ref, double rating, double V_bus) {
    const double p = rating / ref.rating_ref;
    const double v = V_bus / ref.V_bus_ref;
    ConverterParams c;
    c.V_sc = ref.V_sc_ref * v;
    c.f_sw = ref.f_sw;
    c.E_on = ref.E_on_ref * p;
    c.E_off = ref.E_off_ref * p;
    c.R_dcdc = ref.R_dcdc_ref * v * v / p;
    c.R_bus = ref.R_bus_ref * v * v / p;
    c.R_ac = ref.R_ac_ref * v * v / p;
    c.V_bus = V_bus;
    c.D2 = ref.D2;
    c.rating = rating;
    return c;
}

ConverterLosses converter_losses(double I_batt, double V_batt, double P_ac, const ConverterParams& p) {
    const double P_dc = V_batt * I_batt;
    if (std::max(std::abs(P_dc), std::abs(P_ac)) > p.rating * (1.0 + 1e-9))
        throw RatingExceeded("converter power above rating");
    ConverterLosses l;
    if (I_batt == 0.0) return l;
    const double D1 = std::clamp(1.0 - V_batt / p.V_bus, 0.0, 1.0);
    const double I1 = std::abs(I_batt);
    const double I2 = std::abs(P_dc) / p.V_bus;
    l.conduction = I1 * p.V_sc * D1 + I2 * p.V_sc * p.D2;
    l.switching = 2.0 * p.f_sw * (p.E_on + p.E_off);
    l.passive = p.R_dcdc * I1 * I1 + (p.R_bus + p.R_ac) * I2 * I2;
    return l;
}

} // namespace gridtwin
