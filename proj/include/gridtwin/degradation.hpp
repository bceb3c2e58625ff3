#pragma once

#include <array>
#include <span>
#include <vector>

#include "gridtwin/cell_params.hpp"
#include "gridtwin/physics.hpp"
#include "gridtwin/radial_grid.hpp"

namespace gridtwin {

struct DegradationState {
    double tau_sei = 0.0;
    double eps_n = 0.0, eps_p = 0.0;
    // Indexed by Electrode.
    std::array<double, 2> sigma_h_max{0.0, 0.0};
    std::array<double, 2> sigma_h_min{0.0, 0.0};
    double lost_li = 0.0;     // mol consumed by the side reaction
    double lost_li_lam = 0.0; // mol stranded in isolated active material
    int stress_sign = 0;      // sign of the current owning the running extrema
    int pending_sign = 0;
    int pending_steps = 0;
    bool end_of_life = false;

    static DegradationState initial(const CellParams& p);
};

double sei_current(double eta_n, double U_n, double tau_sei, double T, const SeiParams& p, double T_ref);

struct SeiStep {
    DegradationState state;
    double sink_flux; // mol/(m^2 s) leaving the anode surface
};

SeiStep apply_sei(const DegradationState& s, double i_sei, double anode_area_total, double dt,
                  const SeiParams& p);

struct PoreStep {
    double eps_n;
    bool end_of_life;
};

PoreStep pore_clogging(double eps_n, double i_sei, double i_n, const SeiParams& p, double dt, double eps_min);

struct Stresses {
    std::vector<double> sigma_r, sigma_t, sigma_h;
};

double stress_modulus(const StressParams& p, Electrode e); // Omega Y / (3 (1 - nu))

Stresses particle_stresses(std::span<const double> c, const RadialGrid& grid, const StressParams& p,
                           Electrode e);

// Surface value of sigma_h only, same quadrature as particle_stresses.
double surface_hydrostatic_stress(std::span<const double> c, const RadialGrid& grid, const StressParams& p,
                                  Electrode e);

// Tracks running extrema; resets when the current sign changes for more
// than one step.
void track_stress_cycle(DegradationState& s, int current_sign, const std::array<double, 2>& sigma_h_surface);

// LAM decrement rate per electrode (1/s, non-negative).
double crack_lam_rate(const DegradationState& s, const StressParams& p, Electrode e);

struct LamStep {
    double eps_n, eps_p;
};

LamStep crack_lam(const DegradationState& s, const StressParams& p, double dt);

double total_dc_resistance(const DegradationState& s, const CellParams& params, const SeiParams& p);

double active_surface_area(double eps, double R, double A, double tau);

} // namespace gridtwin
