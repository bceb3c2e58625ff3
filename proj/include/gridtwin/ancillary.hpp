#pragma once

namespace gridtwin {

struct FanParams {
    double A_fan = 2.5e-5;    // m^2
    double flow_nom = 5e-4;   // m^3/s
    double P_nom = 0.0;       // W; derived from the cubic law when zero
    double eta_fan = 0.55;
    double rho_air = 1.2;     // kg/m^3
    double cp_air = 1005.0;   // J/(kg K)

    double v_nom() const { return flow_nom / A_fan; }
    void validate() const;
};

// Fan sized for n cells: area and flow scale linearly, power follows.
FanParams scale_fan(const FanParams& per_cell, double n_cells);

double fan_convection(double v);
double fan_power(double v, const FanParams& p);
// Air speed for a normalised power command u = p / p_nom.
double fan_speed_for_command(double u, const FanParams& p);

enum class AcMode { direct_air, chiller };

struct Environment {
    double T_inf = 288.15;
    AcMode mode = AcMode::direct_air;
};

struct AcParams {
    double cop = 3.0;
    double P_nom = 0.0; // W electrical at full command in chiller mode
    void validate() const;
};

struct AcPower {
    double electrical = 0.0;
    bool capable = true;
};

AcPower ac_power(double cooling_demand, double T_hot, double T_cold, const Environment& env, const AcParams& ac,
                 const FanParams& fan);

struct ConverterParams {
    double V_sc = 0.0;     // V per semiconductor stage
    double f_sw = 0.0;     // Hz
    double E_on = 0.0;     // J
    double E_off = 0.0;    // J
    double R_dcdc = 0.0;   // Ohm, filter on the battery side
    double R_bus = 0.0;    // Ohm, DC-link capacitor
    double R_ac = 0.0;     // Ohm, output filter referred to the DC link
    double V_bus = 0.0;    // V
    double D2 = 0.8;       // inverter modulation ratio
    double rating = 0.0;   // W

    void validate() const;
};

// Reference converter at rating_ref / V_bus_ref; rescaled linearly with power.
struct ConverterReference {
    double rating_ref = 1e6;
    double V_bus_ref = 1000.0;
    double V_sc_ref = 2.5;
    double f_sw = 1e4;
    double E_on_ref = 0.1;
    double E_off_ref = 0.1;
    double R_dcdc_ref = 4e-3;
    double R_bus_ref = 1e-3;
    double R_ac_ref = 3e-3;
    double D2 = 0.8;
    double rating_factor = 1.1; // rating over 1C power at V_max
    double bus_factor = 1.25;   // V_bus over the pack V_max
};

ConverterParams scale_converter(const ConverterReference& ref, double rating, double V_bus);

struct ConverterLosses {
    double conduction = 0.0;
    double switching = 0.0;
    double passive = 0.0;
    double total() const { return conduction + switching + passive; }
};

ConverterLosses converter_losses(double I_batt, double V_batt, double P_ac, const ConverterParams& p);

} // namespace gridtwin
