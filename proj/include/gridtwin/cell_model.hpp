#pragma once

#include <vector>

#include "gridtwin/cell_params.hpp"
#include "gridtwin/degradation.hpp"
#include "gridtwin/radial_grid.hpp"

namespace gridtwin {

struct CellState {
    std::vector<double> c_n, c_p; // mol/m^3 at grid nodes, index N on the surface
    double T = 298.15;
    DegradationState deg;

    double surface_n() const { return c_n.back(); }
    double surface_p() const { return c_p.back(); }
};

double arrhenius(double X_ref, double E, double T, double T_ref);

// Intercalation flux into the particle of electrode e (mol/(m^2 s)); positive
// current is discharge, so the anode loses and the cathode gains lithium.
double surface_flux_from_current(double I, const CellParams& p, double eps_i, Electrode e);

double exchange_current_density(double c_surf, double c_max, double c_el, double k, double alpha);

// Overpotential for a kinetic current density (A/m^2).
double overpotential(double i_density, double c_surf, double c_max, double c_el, double k, double T,
                     double alpha);

// Inverse of the kinetic relation around i0: d eta / d i.
double overpotential_slope(double i_density, double i0, double T, double alpha);

double state_of_charge_from_cathode(double y_avg, const CellParams& p);

CellState initial_state(const CellParams& p, int shells, double soc, double T);

CellState diffusion_step(const CellState& s, const CellParams& p, const RadialGrid& grid, double j_n, double j_p,
                         double dt);

// Moles of cyclable lithium held in both particles.
double lithium_inventory(const CellState& s, const CellParams& p, const RadialGrid& grid);
double electrode_inventory(const std::vector<double>& c, double eps, double A, double tau, const RadialGrid& grid);

struct VoltageBreakdown {
    double U_n, U_p, eta_n, eta_p, dUdT, soc, voltage;
};

VoltageBreakdown terminal_voltage(const CellState& s, const CellParams& p, const OcvTables& ocv,
                                  const RadialGrid& grid, double I, double R_dc);

double heat_generation(double I, double eta_n, double eta_p, double R_dc, double T, double dUdT);

} // namespace gridtwin
