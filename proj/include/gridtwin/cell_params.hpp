#pragma once

#include <filesystem>
#include <memory>

#include "gridtwin/table.hpp"

namespace gridtwin {

struct SeiParams {
    double k_sei_ref = 0.0;   // m/s
    double E_ksei = 0.0;      // J/mol
    double D_sei_ref = 0.0;   // m^2/s
    double E_Dsei = 0.0;      // J/mol
    double alpha_sei = 0.5;
    double U_sei = 0.4;       // V
    double v_sei = 9.585e-5;  // m^3/mol
    double v_li = 1.3e-5;     // m^3/mol
    double beta_1 = 0.0;      // lumped
    double r_dc_sei = 0.0;    // Ohm m^2 per m of thickness
    double tau_sei0 = 0.0;    // m

    void validate() const;
};

struct StressParams {
    double Omega_n = 0.0, Omega_p = 0.0;             // m^3/mol
    double Y_n = 0.0, Y_p = 0.0;                     // Pa
    double nu_n = 0.3, nu_p = 0.3;
    double sigma_yield_n = 1.0, sigma_yield_p = 1.0; // Pa
    double beta_2 = 0.0;                             // 1/s
    double m = 1.0;

    void validate() const;
};

struct CellParams {
    double D_n_ref = 0.0, D_p_ref = 0.0; // m^2/s
    double E_Dn = 0.0, E_Dp = 0.0;       // J/mol
    double k_n_ref = 0.0, k_p_ref = 0.0; // m/s
    double E_kn = 0.0, E_kp = 0.0;       // J/mol
    double R_n = 0.0, R_p = 0.0;         // m
    double eps_n0 = 0.0, eps_p0 = 0.0;
    double A_n = 0.0, A_p = 0.0;         // m^2
    double tau_n = 0.0, tau_p = 0.0;     // m
    double c_n_max = 0.0, c_p_max = 0.0; // mol/m^3
    double c_el = 0.0;                   // mol/m^3
    double alpha = 0.5;
    double rho_cell = 0.0, A_cell = 0.0, tau_cell = 0.0, Cp_cell = 0.0;
    double r_dc_n = 0.0, r_dc_p = 0.0;   // Ohm m^2
    double T_ref = 298.15;               // K
    double V_min = 0.0, V_max = 0.0;     // V
    double V_nom = 0.0;                  // V
    double Q_nom = 0.0;                  // Ah

    // Stoichiometry at 0 % and 100 % state of charge; used for initial
    // conditions and for the entropic-coefficient lookup.
    double x_n_0 = 0.0, x_n_100 = 1.0;
    double y_p_0 = 1.0, y_p_100 = 0.0;

    int shells = 10;
    double eps_floor_fraction = 0.01;
    double degradation_acceleration = 1.0;

    SeiParams sei;
    StressParams stress;

    void validate() const;

    double heat_capacity() const { return rho_cell * A_cell * tau_cell * Cp_cell; }
    double one_c_current() const { return Q_nom; }
};

struct OcvTables {
    Table1D U_n;  // V vs anode stoichiometry
    Table1D U_p;  // V vs cathode stoichiometry
    Table1D dUdT; // V/K vs state of charge

    void validate() const;
};

OcvTables load_ocv_tables(const std::filesystem::path& anode, const std::filesystem::path& cathode,
                          const std::filesystem::path& entropic);

} // namespace gridtwin
