#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridtwin/degradation.hpp"
#include "gridtwin/engine.hpp"
#include "gridtwin/errors.hpp"
#include "support.hpp"

using namespace gridtwin;

TEST_SUITE("degradation") {

TEST_CASE("side reaction current limits") {
    const SeiParams& p = shipped().cell.sei;
    const double T = 298.15;
    const double f = faraday / (gas_constant * T);
    const double kinetic = faraday * p.k_sei_ref * std::exp(-p.alpha_sei * f * (0.1 - p.U_sei));
    CHECK(sei_current(0.0, 0.1, 0.0, T, p, T) == doctest::Approx(kinetic).epsilon(1e-13));
    // Thick film: transport through the layer limits the rate.
    const double nF = electrons_per_reaction * faraday;
    CHECK(sei_current(0.0, 0.1, 1.0, T, p, T) == doctest::Approx(nF * p.D_sei_ref / 1.0).epsilon(1e-6));
    CHECK(sei_current(0.0, 0.1, 1.0, T, p, T) < 1e-6 * kinetic);
    CHECK(sei_current(0.0, 0.1, 1e-7, T, p, T) > sei_current(0.0, 0.1, 2e-7, T, p, T));
    double prev = 0.0;
    for (double U = 0.6; U >= 0.05; U -= 0.05) {
        const double i = sei_current(0.0, U, 1e-8, T, p, T);
        CHECK(i > prev);
        prev = i;
    }
    CHECK(sei_current(0.0, 0.1, 1e-7, 318.15, p, T) > sei_current(0.0, 0.1, 1e-7, T, p, T));
    // Cathodic anode overpotential (charging) accelerates the side reaction.
    CHECK(sei_current(-0.02, 0.1, 1e-8, T, p, T) > sei_current(0.0, 0.1, 1e-8, T, p, T));
}

TEST_CASE("applying the side reaction") {
    const SeiParams& p = shipped().cell.sei;
    DegradationState s = DegradationState::initial(shipped().cell);
    const SeiStep none = apply_sei(s, 0.0, 5.0, 10.0, p);
    CHECK(none.state.tau_sei == s.tau_sei);
    CHECK(none.state.lost_li == s.lost_li);

    const SeiStep whole = apply_sei(s, 1e-4, 5.0, 3600.0, p);
    const SeiStep half = apply_sei(apply_sei(s, 1e-4, 5.0, 1800.0, p).state, 1e-4, 5.0, 1800.0, p);
    CHECK(rel_diff(half.state.lost_li, whole.state.lost_li) < 3600.0 * 1e-3);
    CHECK(whole.state.lost_li == doctest::Approx(1.8655685381911913e-05).epsilon(1e-12));
    CHECK(whole.state.tau_sei - s.tau_sei == doctest::Approx(3.5762948877125136e-10).epsilon(1e-9));
    CHECK(whole.sink_flux == doctest::Approx(1e-4 / faraday).epsilon(1e-14));

    // Constant current: lost lithium grows linearly.
    DegradationState t = s;
    for (int k = 1; k <= 10; ++k) {
        t = apply_sei(t, 1e-4, 5.0, 360.0, p).state;
        CHECK(t.lost_li == doctest::Approx(k * 1.8655685381911913e-06).epsilon(1e-12));
    }
}

TEST_CASE("pore clogging") {
    SeiParams p = shipped().cell.sei;
    p.beta_1 = 5e-6;
    CHECK(pore_clogging(0.5, 0.0, 0.0, p, 10.0, 0.005).eps_n == 0.5);
    SeiParams none = p;
    none.beta_1 = 0.0;
    CHECK(pore_clogging(0.5, 1e-3, 3.0, none, 10.0, 0.005).eps_n == 0.5);
    const double i_n = 16.0 / 5.5911600000000012;
    const PoreStep step = pore_clogging(0.5, 2e-4, i_n, p, 10.0, 0.005);
    CHECK(0.5 - step.eps_n == doctest::Approx(1.8610376249043131e-09).epsilon(1e-6));
    CHECK_FALSE(step.end_of_life);
    const PoreStep floor = pore_clogging(0.006, 1.0, 1e3, p, 1e5, 0.005);
    CHECK(floor.eps_n == 0.005);
    CHECK(floor.end_of_life);
}

TEST_CASE("particle stresses") {
    const StressParams& p = shipped().cell.stress;
    const RadialGrid g(10);
    const Stresses zero = particle_stresses(std::vector<double>(11, 12345.0), g, p, Electrode::negative);
    for (std::size_t k = 0; k < 11; ++k) {
        CHECK(std::abs(zero.sigma_r[k]) < 1e-6);
        CHECK(std::abs(zero.sigma_t[k]) < 1e-6);
    }

    // c = c0 + c2 r^2 on the unit sphere:
    // sigma_r = 2K c2 (1 - r^2) / 5, sigma_t = K c2 (2 - 4 r^2) / 5.
    const double c0 = 10000.0, c2 = 3000.0;
    std::vector<double> c(11);
    for (std::size_t k = 0; k < 11; ++k) c[k] = c0 + c2 * g.rho[k] * g.rho[k];
    for (Electrode e : {Electrode::negative, Electrode::positive}) {
        const double K = e == Electrode::negative ? p.Omega_n * p.Y_n / (3.0 * (1.0 - p.nu_n))
                                                  : p.Omega_p * p.Y_p / (3.0 * (1.0 - p.nu_p));
        const Stresses s = particle_stresses(c, g, p, e);
        CHECK(s.sigma_r[0] == doctest::Approx(s.sigma_t[0]).epsilon(1e-12));
        for (std::size_t k = 0; k < 11; ++k) {
            const double r2 = g.rho[k] * g.rho[k];
            const double sr = 2.0 * K * c2 * (1.0 - r2) / 5.0;
            const double st = K * c2 * (2.0 - 4.0 * r2) / 5.0;
            const double scale = K * c2;
            CHECK(std::abs(s.sigma_r[k] - sr) < 1e-6 * scale);
            CHECK(std::abs(s.sigma_t[k] - st) < 1e-6 * scale);
            CHECK(s.sigma_h[k] == doctest::Approx((s.sigma_r[k] + 2.0 * s.sigma_t[k]) / 3.0).epsilon(1e-12));
        }
        CHECK(surface_hydrostatic_stress(c, g, p, e) == doctest::Approx(s.sigma_h[10]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(particle_stresses(std::vector<double>(5, 1.0), g, p, Electrode::negative), DomainError);
}

TEST_CASE("crack driven loss of active material") {
    StressParams p = shipped().cell.stress;
    p.m = 1.0;
    DegradationState s = DegradationState::initial(shipped().cell);
    s.sigma_h_max = {5e6, 4e7};
    s.sigma_h_min = {5e6, 4e7};
    CHECK(crack_lam_rate(s, p, Electrode::negative) == 0.0);
    CHECK(crack_lam(s, p, 100.0).eps_p == s.eps_p);

    s.sigma_h_min = {1e6, 1e7};
    const double r1 = crack_lam_rate(s, p, Electrode::positive);
    CHECK(r1 == doctest::Approx(p.beta_2 * 3e7 / p.sigma_yield_p).epsilon(1e-14));
    DegradationState d = s;
    d.sigma_h_min = {-3e6, -2e7};
    CHECK(crack_lam_rate(d, p, Electrode::positive) == doctest::Approx(2.0 * r1).epsilon(1e-14));
    StressParams off = p;
    off.beta_2 = 0.0;
    CHECK(crack_lam(s, off, 100.0).eps_n == s.eps_n);
}

TEST_CASE("stress cycle extrema reset after a sustained sign change") {
    DegradationState s;
    track_stress_cycle(s, 1, {1.0, 1.0});
    track_stress_cycle(s, 1, {1.0, 1.0}); // two steps establish the sign
    track_stress_cycle(s, 1, {3.0, 2.0});
    track_stress_cycle(s, 1, {-1.0, 0.5});
    CHECK(s.sigma_h_max[0] == 3.0);
    CHECK(s.sigma_h_min[0] == -1.0);
    track_stress_cycle(s, -1, {0.0, 0.0}); // single-step blip keeps the extrema
    CHECK(s.sigma_h_max[0] == 3.0);
    track_stress_cycle(s, 1, {0.0, 0.0});
    CHECK(s.sigma_h_min[0] == -1.0);
    track_stress_cycle(s, -1, {0.5, 0.5});
    track_stress_cycle(s, -1, {0.7, 0.7});
    CHECK(s.sigma_h_max[0] == 0.7);
    CHECK(s.sigma_h_min[0] == 0.7);
}

TEST_CASE("total DC resistance") {
    const CellParams& c = shipped().cell;
    DegradationState s = DegradationState::initial(c);
    CHECK(total_dc_resistance(s, c, c.sei) == doctest::Approx(0.0012260759842322522).epsilon(1e-12));
    s.tau_sei = 2e-7;
    s.eps_n = 0.45;
    s.eps_p = 0.42;
    CHECK(total_dc_resistance(s, c, c.sei) == doctest::Approx(0.0014859017244568721).epsilon(1e-12));

    DegradationState a = DegradationState::initial(c), b = a;
    b.eps_n = 0.5 * a.eps_n;
    const double Sp = active_surface_area(a.eps_p, c.R_p, c.A_p, c.tau_p);
    CHECK(total_dc_resistance(b, c, c.sei) - c.r_dc_p / Sp ==
          doctest::Approx(2.0 * (total_dc_resistance(a, c, c.sei) - c.r_dc_p / Sp)).epsilon(1e-12));
    b.eps_n = 0.0;
    CHECK_THROWS_AS(total_dc_resistance(b, c, c.sei), DomainError);
}

TEST_CASE("calendar fade follows a square root at high state of charge") {
    auto exponent = [](double soc) {
        Cell cell = make_cell(soc);
        const double q0 = measure_cell_capacity(make_cell(1.0), 10.0);
        std::vector<double> t, fade;
        for (int day = 1; day <= 200; ++day) {
            for (int h = 0; h < 24; ++h) {
                cell.prepare(3600.0);
                cell.commit(0.0);
            }
            if (day % 20 == 0) {
                t.push_back(day * 86400.0);
                fade.push_back(q0 - measure_cell_capacity(cell, 10.0));
            }
        }
        return power_law_exponent(t, fade);
    };
    const double high = exponent(1.0), low = exponent(0.1);
    CHECK(high >= 0.4);
    CHECK(high <= 0.6);
    CHECK(low > high);
}

TEST_CASE("cycling never raises capacity or lowers resistance") {
    CellParams p = shipped().cell;
    p.degradation_acceleration = 20.0;
    CellUnit u(make_cell(p, 0.0));
    double q = measure_cell_capacity(u.cell, 10.0);
    double r = u.cell.resistance();
    for (int cycle = 0; cycle < 6; ++cycle) {
        cccv_charge(u, 16.0, p.V_max, 0.8, 10.0);
        for (int k = 0; k < 3600; ++k) {
            u.prepare(10.0);
            if (u.trial(16.0).voltage < p.V_min) break;
            u.commit(16.0);
            const double rr = u.cell.resistance();
            CHECK(rr >= r);
            r = rr;
        }
        const double qq = measure_cell_capacity(u.cell, 10.0);
        CHECK(qq < q);
        q = qq;
    }
}

TEST_CASE("relaxed storage produces no crack growth") {
    Cell cell = make_cell(0.3);
    for (int k = 0; k < 200; ++k) {
        cell.prepare(2.0);
        cell.commit(32.0);
    }
    for (int k = 0; k < 100; ++k) {
        cell.prepare(60.0);
        cell.commit(0.0);
    }
    const double eps_p = cell.state().deg.eps_p;
    const double eps_n = cell.state().deg.eps_n;
    const double clog_n = eps_n; // pore clogging continues at rest through the side reaction
    for (int k = 0; k < 500; ++k) {
        cell.prepare(60.0);
        cell.commit(0.0);
    }
    CHECK(cell.state().deg.eps_p == eps_p);
    CHECK(cell.state().deg.eps_n <= clog_n);
    CHECK(cell.state().deg.eps_n > clog_n - 1e-6);
}

} // TEST_SUITE
