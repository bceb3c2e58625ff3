#include "gridtwin/cell_params.hpp"

#include <string>

#include "gridtwin/errors.hpp"

namespace gridtwin {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid parameter: " + what);
}

} // namespace

void SeiParams::validate() const {
    require(k_sei_ref > 0.0, "sei.k_sei_ref must be positive");
    require(D_sei_ref > 0.0, "sei.D_sei_ref must be positive");
    require(E_ksei >= 0.0 && E_Dsei >= 0.0, "sei activation energies must be non-negative");
    require(alpha_sei > 0.0 && alpha_sei < 1.0, "sei.alpha_sei must lie in (0, 1)");
    require(v_sei > 0.0 && v_li > 0.0, "sei molar volumes must be positive");
    require(beta_1 >= 0.0, "sei.beta_1 must be non-negative");
    require(r_dc_sei >= 0.0, "sei.r_dc_sei must be non-negative");
    require(tau_sei0 >= 0.0, "sei.tau_sei0 must be non-negative");
}

void StressParams::validate() const {
    require(Omega_n >= 0.0 && Omega_p >= 0.0, "stress molar volumes must be non-negative");
    require(Y_n > 0.0 && Y_p > 0.0, "Young's moduli must be positive");
    require(nu_n > 0.0 && nu_n < 0.5 && nu_p > 0.0 && nu_p < 0.5, "Poisson ratios must lie in (0, 0.5)");
    require(sigma_yield_n > 0.0 && sigma_yield_p > 0.0, "yield strengths must be positive");
    require(beta_2 >= 0.0, "stress.beta_2 must be non-negative");
    require(m > 0.0, "stress.m must be positive");
}

void CellParams::validate() const {
    require(D_n_ref > 0.0 && D_p_ref > 0.0, "diffusion constants must be positive");
    require(E_Dn >= 0.0 && E_Dp >= 0.0 && E_kn >= 0.0 && E_kp >= 0.0, "activation energies must be non-negative");
    require(k_n_ref > 0.0 && k_p_ref > 0.0, "rate constants must be positive");
    require(R_n > 0.0 && R_p > 0.0, "particle radii must be positive");
    require(eps_n0 > 0.0 && eps_n0 < 1.0 && eps_p0 > 0.0 && eps_p0 < 1.0, "volume fractions must lie in (0, 1)");
    require(A_n > 0.0 && A_p > 0.0 && tau_n > 0.0 && tau_p > 0.0, "electrode geometry must be positive");
    require(c_n_max > 0.0 && c_p_max > 0.0 && c_el > 0.0, "concentrations must be positive");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(rho_cell > 0.0 && A_cell > 0.0 && tau_cell > 0.0 && Cp_cell > 0.0, "cell thermal data must be positive");
    require(r_dc_n > 0.0 && r_dc_p > 0.0, "electrode resistances must be positive");
    require(T_ref > 0.0, "T_ref must be positive");
    require(V_min < V_max, "V_min must be below V_max");
    require(Q_nom > 0.0 && V_nom > 0.0, "nominal capacity and voltage must be positive");
    require(x_n_0 > 0.0 && x_n_100 < 1.0 && x_n_0 < x_n_100, "anode stoichiometry window must lie in (0, 1)");
    require(y_p_100 > 0.0 && y_p_0 < 1.0 && y_p_100 < y_p_0, "cathode stoichiometry window must lie in (0, 1)");
    require(shells >= 2, "shells must be at least 2");
    require(eps_floor_fraction > 0.0 && eps_floor_fraction < 1.0, "eps_floor_fraction must lie in (0, 1)");
    require(degradation_acceleration >= 0.0, "degradation_acceleration must be non-negative");
    sei.validate();
    stress.validate();
}

void OcvTables::validate() const {
    require(!U_n.empty() && !U_p.empty() && !dUdT.empty(), "OCV tables must be loaded");
    require(U_n.front_x() <= 0.0 && U_n.back_x() >= 1.0, "anode OCV table must cover [0, 1]");
    require(U_p.front_x() <= 0.0 && U_p.back_x() >= 1.0, "cathode OCV table must cover [0, 1]");
}

OcvTables load_ocv_tables(const std::filesystem::path& anode, const std::filesystem::path& cathode,
                          const std::filesystem::path& entropic) {
    OcvTables t{load_table_csv(anode), load_table_csv(cathode), load_table_csv(entropic)};
    t.validate();
    return t;
}

} // namespace gridtwin
