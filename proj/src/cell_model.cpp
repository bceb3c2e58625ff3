#include "gridtwin/cell_model.hpp"

#include <algorithm>
#include <cmath>

#include "gridtwin/errors.hpp"

namespace gridtwin {

double arrhenius(double X_ref, double E, double T, double T_ref) {
    if (!(T > 0.0) || !(T_ref > 0.0)) throw DomainError("non-positive temperature in Arrhenius relation");
    if (E == 0.0 || T == T_ref) return X_ref;
    return X_ref * std::exp(-E / gas_constant * (1.0 / T - 1.0 / T_ref));
}

double surface_flux_from_current(double I, const CellParams& p, double eps_i, Electrode e) {
    if (!(eps_i > 0.0)) throw DomainError("no active material left");
    const double nF = electrons_per_reaction * faraday;
    if (e == Electrode::negative) return -I / (nF * active_surface_area(eps_i, p.R_n, p.A_n, p.tau_n));
    return I / (nF * active_surface_area(eps_i, p.R_p, p.A_p, p.tau_p));
}

double exchange_current_density(double c, double c_max, double c_el, double k, double alpha) {
    const double nF = electrons_per_reaction * faraday;
    if (alpha == 0.5) return nF * k * std::sqrt(c * c_el * (c_max - c));
    return nF * k * std::pow(c, alpha) * std::pow(c_el, 1.0 - alpha) * std::pow(c_max - c, 1.0 - alpha);
}

namespace {

// i(eta) = i0 (exp(-alpha f eta) - exp((1 - alpha) f eta)), strictly decreasing.
double bv_current(double eta, double i0, double f, double alpha) {
    return i0 * (std::exp(-alpha * f * eta) - std::exp((1.0 - alpha) * f * eta));
}

double solve_bv(double i, double i0, double f, double alpha) {
    if (i == 0.0) return 0.0;
    const double tol = 1e-10 * std::abs(i) + 1e-12;
    // Bracket from the dominant-branch Tafel estimate.
    double lo = -1.0 / f, hi = 1.0 / f;
    while (bv_current(lo, i0, f, alpha) < i) lo *= 2.0;
    while (bv_current(hi, i0, f, alpha) > i) hi *= 2.0;
    double eta = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double r = bv_current(eta, i0, f, alpha) - i;
        if (std::abs(r) < tol) break;
        if (r > 0.0) lo = eta; else hi = eta;
        double d = -i0 * f * (alpha * std::exp(-alpha * f * eta) + (1.0 - alpha) * std::exp((1.0 - alpha) * f * eta));
        double next = eta - r / d;
        eta = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    return eta;
}

} // namespace

double overpotential(double i, double c, double c_max, double c_el, double k, double T, double alpha) {
    if (!(c > 0.0) || !(c < c_max)) throw DomainError("surface concentration saturated");
    const double i0 = exchange_current_density(c, c_max, c_el, k, alpha);
    const double f = electrons_per_reaction * faraday / (gas_constant * T);
    if (alpha == 0.5) return -2.0 / f * std::asinh(i / (2.0 * i0));
    return solve_bv(i, i0, f, alpha);
}

double overpotential_slope(double i, double i0, double T, double alpha) {
    const double f = electrons_per_reaction * faraday / (gas_constant * T);
    if (alpha == 0.5) {
        double x = i / (2.0 * i0);
        return -1.0 / (f * i0 * std::sqrt(1.0 + x * x));
    }
    double eta = solve_bv(i, i0, f, alpha);
    return -1.0 / (i0 * f * (alpha * std::exp(-alpha * f * eta) + (1.0 - alpha) * std::exp((1.0 - alpha) * f * eta)));
}

double state_of_charge_from_cathode(double y, const CellParams& p) {
    return std::clamp((p.y_p_0 - y) / (p.y_p_0 - p.y_p_100), 0.0, 1.0);
}

CellState initial_state(const CellParams& p, int shells, double soc, double T) {
    CellState s;
    const double x = p.x_n_0 + soc * (p.x_n_100 - p.x_n_0);
    const double y = p.y_p_0 + soc * (p.y_p_100 - p.y_p_0);
    s.c_n.assign(static_cast<std::size_t>(shells) + 1, x * p.c_n_max);
    s.c_p.assign(static_cast<std::size_t>(shells) + 1, y * p.c_p_max);
    s.T = T;
    s.deg = DegradationState::initial(p);
    return s;
}

namespace {

void step_particle(std::vector<double>& c, const RadialGrid& grid, double D, double R, double j, double dt,
                   double c_max, Electrode e) {
    DiffusionOperator op;
    op.factor(grid, D * dt / (R * R));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= grid.volume[k];
    c.back() += j * dt / R;
    op.solve(c);
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] < 0.0 || c[k] > c_max) throw SaturationError(e, static_cast<int>(k), c[k]);
}

} // namespace

CellState diffusion_step(const CellState& s, const CellParams& p, const RadialGrid& grid, double j_n, double j_p,
                         double dt) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!std::isfinite(j_n) || !std::isfinite(j_p)) throw DomainError("non-finite surface flux");
    CellState out = s;
    step_particle(out.c_n, grid, arrhenius(p.D_n_ref, p.E_Dn, s.T, p.T_ref), p.R_n, j_n, dt, p.c_n_max,
                  Electrode::negative);
    step_particle(out.c_p, grid, arrhenius(p.D_p_ref, p.E_Dp, s.T, p.T_ref), p.R_p, j_p, dt, p.c_p_max,
                  Electrode::positive);
    return out;
}

double electrode_inventory(const std::vector<double>& c, double eps, double A, double tau, const RadialGrid& grid) {
    return grid.mean(c) * eps * A * tau;
}

double lithium_inventory(const CellState& s, const CellParams& p, const RadialGrid& grid) {
    return electrode_inventory(s.c_n, s.deg.eps_n, p.A_n, p.tau_n, grid) +
           electrode_inventory(s.c_p, s.deg.eps_p, p.A_p, p.tau_p, grid);
}

VoltageBreakdown terminal_voltage(const CellState& s, const CellParams& p, const OcvTables& ocv,
                                  const RadialGrid& grid, double I, double R_dc) {
    VoltageBreakdown b{};
    const double cn = s.surface_n(), cp = s.surface_p();
    b.U_n = ocv.U_n(cn / p.c_n_max);
    b.U_p = ocv.U_p(cp / p.c_p_max);
    const double k_n = arrhenius(p.k_n_ref, p.E_kn, s.T, p.T_ref);
    const double k_p = arrhenius(p.k_p_ref, p.E_kp, s.T, p.T_ref);
    const double S_n = active_surface_area(s.deg.eps_n, p.R_n, p.A_n, p.tau_n);
    const double S_p = active_surface_area(s.deg.eps_p, p.R_p, p.A_p, p.tau_p);
    b.eta_n = overpotential(-I / S_n, cn, p.c_n_max, p.c_el, k_n, s.T, p.alpha);
    b.eta_p = overpotential(I / S_p, cp, p.c_p_max, p.c_el, k_p, s.T, p.alpha);
    b.soc = state_of_charge_from_cathode(grid.mean(s.c_p) / p.c_p_max, p);
    b.dUdT = ocv.dUdT(b.soc);
    b.voltage = b.U_p - b.U_n + (s.T - p.T_ref) * b.dUdT - (b.eta_n - b.eta_p) - R_dc * I;
    return b;
}

double heat_generation(double I, double eta_n, double eta_p, double R_dc, double T, double dUdT) {
    return I * I * R_dc + I * (eta_n - eta_p) + I * T * dUdT;
}

} // namespace gridtwin
