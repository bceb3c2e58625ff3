#include "gridtwin/cell.hpp"

#include <algorithm>
#include <cmath>

#include "gridtwin/errors.hpp"

namespace gridtwin {

namespace {

constexpr double nF = electrons_per_reaction * faraday;

double clamp_interior(double c, double c_max) {
    return std::clamp(c, 1e-9 * c_max, (1.0 - 1e-9) * c_max);
}

} // namespace

double zero_current_threshold(const CellParams& p) { return 1e-3 * p.Q_nom; }

Cell::Cell(CellParams params, std::shared_ptr<const OcvTables> ocv, std::shared_ptr<const RadialGrid> grid,
           double soc, double T)
    : params_(std::move(params)), ocv_(std::move(ocv)), grid_(std::move(grid)) {
    state_ = initial_state(params_, grid_->shells, soc, T);
    voltage_ = rest_voltage();
}

double Cell::resistance() const { return total_dc_resistance(state_.deg, params_, params_.sei); }

double Cell::soc() const { return state_of_charge_from_cathode(grid_->mean(state_.c_p) / params_.c_p_max, params_); }

double Cell::lithium_inventory() const { return gridtwin::lithium_inventory(state_, params_, *grid_); }

double Cell::rest_voltage() const {
    const double soc_now = soc();
    return ocv_->U_p(state_.surface_p() / params_.c_p_max) - ocv_->U_n(state_.surface_n() / params_.c_n_max) +
           (state_.T - params_.T_ref) * ocv_->dUdT(soc_now);
}

void Cell::prepare(double dt) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    dt_ = dt;
    const CellParams& p = params_;
    const RadialGrid& g = *grid_;
    const double T = state_.T;
    const std::size_t m = g.size();

    auto build = [&](Particle& part, const std::vector<double>& c, double D, double R) {
        op_.factor(g, D * dt / (R * R));
        part.base.resize(m);
        part.unit.assign(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) part.base[k] = g.volume[k] * c[k];
        part.unit[m - 1] = dt / R;
        op_.solve(part.base);
        op_.solve(part.unit);
    };
    build(neg_, state_.c_n, arrhenius(p.D_n_ref, p.E_Dn, T, p.T_ref), p.R_n);
    build(pos_, state_.c_p, arrhenius(p.D_p_ref, p.E_Dp, T, p.T_ref), p.R_p);

    S_n_ = active_surface_area(state_.deg.eps_n, p.R_n, p.A_n, p.tau_n);
    S_p_ = active_surface_area(state_.deg.eps_p, p.R_p, p.A_p, p.tau_p);
    R_dc_ = total_dc_resistance(state_.deg, p, p.sei);
    k_n_ = arrhenius(p.k_n_ref, p.E_kn, T, p.T_ref);
    k_p_ = arrhenius(p.k_p_ref, p.E_kp, T, p.T_ref);
    mean_p_ = g.mean(state_.c_p);

    const double cn = clamp_interior(state_.surface_n(), p.c_n_max);
    i0_n_start_ = exchange_current_density(cn, p.c_n_max, p.c_el, k_n_, p.alpha);
    if (degradation_enabled) {
        const double f = faraday / (gas_constant * T);
        const double U_n = ocv_->U_n(cn / p.c_n_max);
        const double k = arrhenius(p.sei.k_sei_ref, p.sei.E_ksei, T, p.T_ref);
        const double D = arrhenius(p.sei.D_sei_ref, p.sei.E_Dsei, T, p.T_ref);
        const double K = std::exp(-p.sei.alpha_sei * f * (U_n - p.sei.U_sei));
        sei_resistance_ = 1.0 / (nF * k * K) + state_.deg.tau_sei / (nF * D);
    }
}

CellTrial Cell::trial(double I) const {
    const CellParams& p = params_;
    const double T = state_.T;
    const double f = electrons_per_reaction * faraday / (gas_constant * T);
    const std::size_t N = grid_->size() - 1;
    CellTrial t;

    const double i_n = -I / S_n_;
    const double i_p = I / S_p_;
    if (degradation_enabled) {
        // Side reaction evaluated against the start-of-step surface state.
        const double eta0 = p.alpha == 0.5 ? -2.0 / f * std::asinh(i_n / (2.0 * i0_n_start_))
                                           : overpotential(i_n, clamp_interior(state_.surface_n(), p.c_n_max),
                                                           p.c_n_max, p.c_el, k_n_, T, p.alpha);
        t.i_sei = p.degradation_acceleration * std::exp(-p.sei.alpha_sei * f * eta0) / sei_resistance_;
    }
    t.j_n = -(I / S_n_ + t.i_sei) / nF;
    t.j_p = I / (nF * S_p_);
    t.c_n_surf = neg_.base[N] + t.j_n * neg_.unit[N];
    t.c_p_surf = pos_.base[N] + t.j_p * pos_.unit[N];
    t.saturated = !(t.c_n_surf > 0.0 && t.c_n_surf < p.c_n_max && t.c_p_surf > 0.0 && t.c_p_surf < p.c_p_max);
    const double cn = clamp_interior(t.c_n_surf, p.c_n_max);
    const double cp = clamp_interior(t.c_p_surf, p.c_p_max);
    const double xn = cn / p.c_n_max, yp = cp / p.c_p_max;

    t.U_n = ocv_->U_n(xn);
    t.U_p = ocv_->U_p(yp);
    const double i0_n = exchange_current_density(cn, p.c_n_max, p.c_el, k_n_, p.alpha);
    const double i0_p = exchange_current_density(cp, p.c_p_max, p.c_el, k_p_, p.alpha);
    if (p.alpha == 0.5) {
        t.eta_n = -2.0 / f * std::asinh(i_n / (2.0 * i0_n));
        t.eta_p = -2.0 / f * std::asinh(i_p / (2.0 * i0_p));
    } else {
        t.eta_n = overpotential(i_n, cn, p.c_n_max, p.c_el, k_n_, T, p.alpha);
        t.eta_p = overpotential(i_p, cp, p.c_p_max, p.c_el, k_p_, T, p.alpha);
    }
    const double mean_p = mean_p_ + 3.0 * t.j_p * dt_ / p.R_p;
    t.soc = state_of_charge_from_cathode(mean_p / p.c_p_max, p);
    t.dUdT = ocv_->dUdT(t.soc);
    t.voltage = t.U_p - t.U_n + (T - p.T_ref) * t.dUdT - (t.eta_n - t.eta_p) - R_dc_ * I;

    const double dUn = ocv_->U_n.slope(xn) * (-neg_.unit[N] / (nF * S_n_)) / p.c_n_max;
    const double dUp = ocv_->U_p.slope(yp) * (pos_.unit[N] / (nF * S_p_)) / p.c_p_max;
    const double deta_n = overpotential_slope(i_n, i0_n, T, p.alpha) * (-1.0 / S_n_);
    const double deta_p = overpotential_slope(i_p, i0_p, T, p.alpha) * (1.0 / S_p_);
    const double dVdI = dUp - dUn - (deta_n - deta_p) - R_dc_;
    t.resistance = std::max(-dVdI, 0.1 * R_dc_);
    return t;
}

CellStepRecord Cell::commit(double I) {
    const CellParams& p = params_;
    const RadialGrid& g = *grid_;
    const CellTrial t = trial(I);
    const std::size_t m = g.size();
    if (t.saturated) {
        bool anode = !(t.c_n_surf > 0.0 && t.c_n_surf < p.c_n_max);
        throw SaturationError(anode ? Electrode::negative : Electrode::positive, static_cast<int>(m - 1),
                              anode ? t.c_n_surf : t.c_p_surf);
    }
    for (std::size_t k = 0; k < m; ++k) {
        double cn = neg_.base[k] + t.j_n * neg_.unit[k];
        double cp = pos_.base[k] + t.j_p * pos_.unit[k];
        if (cn < 0.0 || cn > p.c_n_max) throw SaturationError(Electrode::negative, static_cast<int>(k), cn);
        if (cp < 0.0 || cp > p.c_p_max) throw SaturationError(Electrode::positive, static_cast<int>(k), cp);
        state_.c_n[k] = cn;
        state_.c_p[k] = cp;
    }

    CellStepRecord r;
    r.current = I;
    r.voltage = t.voltage;
    const double emf = t.U_p - t.U_n + (state_.T - p.T_ref) * t.dUdT;
    r.ocv_power = emf * I;
    r.loss_power = I * I * R_dc_ + I * (t.eta_n - t.eta_p);
    r.heat = heat_generation(I, t.eta_n, t.eta_p, R_dc_, state_.T, t.dUdT);
    r.sei_charge = t.i_sei * S_n_ * dt_;
    voltage_ = t.voltage;
    current_ = I;

    if (!degradation_enabled) return r;

    DegradationState& d = state_.deg;
    const double eps_min_n = p.eps_floor_fraction * p.eps_n0;
    const double eps_min_p = p.eps_floor_fraction * p.eps_p0;
    const double accel = p.degradation_acceleration;
    d = apply_sei(d, t.i_sei, S_n_, dt_, p.sei).state;

    const double mean_n = g.mean(state_.c_n);
    const double mean_p = g.mean(state_.c_p);
    PoreStep pore = pore_clogging(d.eps_n, t.i_sei, accel * I / S_n_, p.sei, dt_, eps_min_n);
    d.lost_li_lam += (d.eps_n - pore.eps_n) * p.A_n * p.tau_n * mean_n;
    d.eps_n = pore.eps_n;
    d.end_of_life = d.end_of_life || pore.end_of_life;

    const std::array<double, 2> sigma{
        surface_hydrostatic_stress(state_.c_n, g, p.stress, Electrode::negative),
        surface_hydrostatic_stress(state_.c_p, g, p.stress, Electrode::positive)};
    const int sign = std::abs(I) < zero_current_threshold(p) ? 0 : (I > 0.0 ? 1 : -1);
    track_stress_cycle(d, sign, sigma);
    if (sign != 0) {
        double eps_n = d.eps_n - accel * crack_lam_rate(d, p.stress, Electrode::negative) * dt_;
        double eps_p = d.eps_p - accel * crack_lam_rate(d, p.stress, Electrode::positive) * dt_;
        if (eps_n <= eps_min_n) { eps_n = eps_min_n; d.end_of_life = true; }
        if (eps_p <= eps_min_p) { eps_p = eps_min_p; d.end_of_life = true; }
        d.lost_li_lam += (d.eps_n - eps_n) * p.A_n * p.tau_n * mean_n + (d.eps_p - eps_p) * p.A_p * p.tau_p * mean_p;
        d.eps_n = eps_n;
        d.eps_p = eps_p;
    }
    return r;
}

} // namespace gridtwin

namespace gridtwin {

void Cell::save(BinaryWriter& w) const {
    w.put_vector(state_.c_n);
    w.put_vector(state_.c_p);
    w.put(state_.T);
    const DegradationState& d = state_.deg;
    w.put(d.tau_sei);
    w.put(d.eps_n);
    w.put(d.eps_p);
    w.put(d.sigma_h_max);
    w.put(d.sigma_h_min);
    w.put(d.lost_li);
    w.put(d.lost_li_lam);
    w.put(d.stress_sign);
    w.put(d.pending_sign);
    w.put(d.pending_steps);
    w.put<std::uint8_t>(d.end_of_life);
    w.put(voltage_);
    w.put(current_);
}

void Cell::load(BinaryReader& r) {
    state_.c_n = r.get_vector();
    state_.c_p = r.get_vector();
    if (state_.c_n.size() != grid_->size() || state_.c_p.size() != grid_->size())
        throw CheckpointError("checkpoint does not match the radial grid");
    state_.T = r.get<double>();
    DegradationState& d = state_.deg;
    d.tau_sei = r.get<double>();
    d.eps_n = r.get<double>();
    d.eps_p = r.get<double>();
    d.sigma_h_max = r.get<std::array<double, 2>>();
    d.sigma_h_min = r.get<std::array<double, 2>>();
    d.lost_li = r.get<double>();
    d.lost_li_lam = r.get<double>();
    d.stress_sign = r.get<int>();
    d.pending_sign = r.get<int>();
    d.pending_steps = r.get<int>();
    d.end_of_life = r.get<std::uint8_t>() != 0;
    voltage_ = r.get<double>();
    current_ = r.get<double>();
}

} // namespace gridtwin
