#include "gridtwin/degradation.hpp"

#include <cmath>

#include "gridtwin/cell_model.hpp"
#include "gridtwin/errors.hpp"

namespace gridtwin {

DegradationState DegradationState::initial(const CellParams& p) {
    DegradationState s;
    s.tau_sei = p.sei.tau_sei0;
    s.eps_n = p.eps_n0;
    s.eps_p = p.eps_p0;
    return s;
}

double sei_current(double eta_n, double U_n, double tau_sei, double T, const SeiParams& p, double T_ref) {
    const double nF = electrons_per_reaction * faraday;
    const double f = faraday / (gas_constant * T);
    const double k = arrhenius(p.k_sei_ref, p.E_ksei, T, T_ref);
    const double D = arrhenius(p.D_sei_ref, p.E_Dsei, T, T_ref);
    const double K = std::exp(-p.alpha_sei * f * (U_n - p.U_sei));
    const double resistance = 1.0 / (nF * k * K) + tau_sei / (nF * D);
    return std::exp(-p.alpha_sei * f * eta_n) / resistance;
}

SeiStep apply_sei(const DegradationState& s, double i_sei, double anode_area_total, double dt,
                  const SeiParams& p) {
    const double nF = electrons_per_reaction * faraday;
    SeiStep out{s, i_sei / nF};
    out.state.tau_sei += i_sei / nF * p.v_sei * dt;
    out.state.lost_li += i_sei * anode_area_total * dt / nF;
    return out;
}

PoreStep pore_clogging(double eps_n, double i_sei, double i_n, const SeiParams& p, double dt, double eps_min) {
    double next = eps_n - p.beta_1 * (p.v_sei * i_sei + p.v_li * std::abs(i_n)) * dt;
    if (next <= eps_min) return {eps_min, true};
    return {next, false};
}

double stress_modulus(const StressParams& p, Electrode e) {
    if (e == Electrode::negative) return p.Omega_n * p.Y_n / (3.0 * (1.0 - p.nu_n));
    return p.Omega_p * p.Y_p / (3.0 * (1.0 - p.nu_p));
}

Stresses particle_stresses(std::span<const double> c, const RadialGrid& grid, const StressParams& p,
                           Electrode e) {
    const std::size_t m = grid.size();
    if (c.size() != m) throw DomainError("concentration profile does not match the radial grid");
    const double K = stress_modulus(p, e);
    const double whole = grid.cumulative_integral(grid.shells, c);
    Stresses s;
    s.sigma_r.resize(m);
    s.sigma_t.resize(m);
    s.sigma_h.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        // (1/r^3) int_0^r c z^2 dz tends to c(0)/3 at the centre
        double inner = k == 0 ? c[0] / 3.0
                              : grid.cumulative_integral(static_cast<int>(k), c) / std::pow(grid.rho[k], 3);
        s.sigma_r[k] = 2.0 * K * (whole - inner);
        s.sigma_t[k] = K * (2.0 * whole + inner - c[k]);
        s.sigma_h[k] = (s.sigma_r[k] + 2.0 * s.sigma_t[k]) / 3.0;
    }
    return s;
}

double surface_hydrostatic_stress(std::span<const double> c, const RadialGrid& grid, const StressParams& p,
                                  Electrode e) {
    const double K = stress_modulus(p, e);
    const double whole = grid.cumulative_integral(grid.shells, c);
    const double sigma_t = K * (3.0 * whole - c[grid.shells]);
    return 2.0 * sigma_t / 3.0;
}

void track_stress_cycle(DegradationState& s, int sign, const std::array<double, 2>& sigma) {
    if (sign == s.stress_sign) {
        s.pending_steps = 0;
    } else {
        if (s.pending_steps > 0 && sign == s.pending_sign) {
            ++s.pending_steps;
        } else {
            s.pending_sign = sign;
            s.pending_steps = 1;
        }
        if (s.pending_steps > 1) {
            s.stress_sign = sign;
            s.pending_steps = 0;
            s.sigma_h_max = sigma;
            s.sigma_h_min = sigma;
            return;
        }
    }
    for (int i = 0; i < 2; ++i) {
        s.sigma_h_max[i] = std::max(s.sigma_h_max[i], sigma[i]);
        s.sigma_h_min[i] = std::min(s.sigma_h_min[i], sigma[i]);
    }
}

double crack_lam_rate(const DegradationState& s, const StressParams& p, Electrode e) {
    const int i = static_cast<int>(e);
    const double yield = e == Electrode::negative ? p.sigma_yield_n : p.sigma_yield_p;
    const double amplitude = s.sigma_h_max[i] - s.sigma_h_min[i];
    if (amplitude <= 0.0 || p.beta_2 == 0.0) return 0.0;
    const double ratio = amplitude / yield;
    return p.beta_2 * (p.m == 1.0 ? ratio : std::pow(ratio, 1.0 / p.m));
}

LamStep crack_lam(const DegradationState& s, const StressParams& p, double dt) {
    return {s.eps_n - crack_lam_rate(s, p, Electrode::negative) * dt,
            s.eps_p - crack_lam_rate(s, p, Electrode::positive) * dt};
}

double active_surface_area(double eps, double R, double A, double tau) {
    return 3.0 * eps / R * A * tau;
}

double total_dc_resistance(const DegradationState& s, const CellParams& c, const SeiParams& p) {
    if (!(s.eps_n > 0.0) || !(s.eps_p > 0.0)) throw DomainError("active material exhausted");
    const double S_n = active_surface_area(s.eps_n, c.R_n, c.A_n, c.tau_n);
    const double S_p = active_surface_area(s.eps_p, c.R_p, c.A_p, c.tau_p);
    return c.r_dc_n / S_n + c.r_dc_p / S_p + p.r_dc_sei * s.tau_sei / S_n;
}

} // namespace gridtwin
