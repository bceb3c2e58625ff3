#pragma once

#include <memory>
#include <vector>

#include "gridtwin/cell_model.hpp"
#include "gridtwin/checkpoint.hpp"

namespace gridtwin {

struct CellTrial {
    double voltage = 0.0;
    double resistance = 0.0; // -dV/dI, positive
    bool saturated = false;
    double j_n = 0.0, j_p = 0.0;
    double c_n_surf = 0.0, c_p_surf = 0.0;
    double U_n = 0.0, U_p = 0.0, eta_n = 0.0, eta_p = 0.0;
    double dUdT = 0.0, soc = 0.0;
    double i_sei = 0.0;
};

// Per-step electrical and thermal outputs of one cell (W unless noted).
struct CellStepRecord {
    double current = 0.0;
    double voltage = 0.0;
    double ocv_power = 0.0;  // (U_p - U_n + (T - T_ref) dUdT) I, leaves storage when positive
    double loss_power = 0.0; // I^2 R + I (eta_n - eta_p)
    double heat = 0.0;       // loss plus reversible term
    double sei_charge = 0.0; // C consumed by the side reaction this step
};

// One electrochemical cell. A step is prepare(dt), any number of trial(I)
// calls, then one commit(I); trial is pure and O(1) in I.
class Cell {
public:
    Cell(CellParams params, std::shared_ptr<const OcvTables> ocv, std::shared_ptr<const RadialGrid> grid,
         double soc, double T);

    const CellParams& params() const { return params_; }
    const CellState& state() const { return state_; }
    CellState& mutable_state() { return state_; }
    const RadialGrid& grid() const { return *grid_; }
    const OcvTables& ocv() const { return *ocv_; }

    void set_temperature(double T) { state_.T = T; }
    double temperature() const { return state_.T; }

    void prepare(double dt);
    CellTrial trial(double I) const;
    CellStepRecord commit(double I);

    double voltage() const { return voltage_; }
    double current() const { return current_; }
    double resistance() const;
    double soc() const;
    double lithium_inventory() const;
    double rest_voltage() const; // terminal voltage at zero current and the present state

    void save(BinaryWriter& w) const;
    void load(BinaryReader& r);

    bool degradation_enabled = true;
    // Number of physical cells this instance stands for.
    double multiplicity = 1.0;

private:
    struct Particle {
        std::vector<double> base;  // profile after dt at zero flux
        std::vector<double> unit;  // response to unit surface flux
    };

    CellParams params_;
    std::shared_ptr<const OcvTables> ocv_;
    std::shared_ptr<const RadialGrid> grid_;
    CellState state_;
    double voltage_ = 0.0;
    double current_ = 0.0;

    // Step context from prepare().
    double dt_ = 0.0;
    Particle neg_, pos_;
    double S_n_ = 0.0, S_p_ = 0.0, R_dc_ = 0.0;
    double k_n_ = 0.0, k_p_ = 0.0;
    double mean_p_ = 0.0;
    double i0_n_start_ = 0.0;
    double sei_resistance_ = 0.0;
    DiffusionOperator op_;
};

double zero_current_threshold(const CellParams& p);

} // namespace gridtwin
