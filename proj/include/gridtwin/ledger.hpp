#pragma once

#include <string>
#include <vector>

namespace gridtwin {

enum class LossItem {
    cell_ohmic,
    contact,
    converter_cond,
    converter_sw,
    converter_passive,
    fan,
    ac,
    balancing,
    count
};

inline constexpr int loss_item_count = static_cast<int>(LossItem::count);
const char* loss_item_name(LossItem i);

// Energy bookkeeping for one cycle row, all in J.
struct EnergyLedger {
    double grid_in = 0.0;
    double grid_out = 0.0;
    double delta_stored = 0.0;
    double losses[loss_item_count] = {};
    double grid_out_discharge = 0.0;

    double total_losses() const;
    // grid_in - grid_out - delta_stored - losses
    double closure_residual() const;
    double closure_error() const; // relative to grid_in
    void add(LossItem i, double joules) { losses[static_cast<int>(i)] += joules; }
    double item(LossItem i) const { return losses[static_cast<int>(i)]; }
};

struct CapacityStats {
    bool measured = false;
    double mean = 0.0, sd = 0.0, min = 0.0, max = 0.0; // Ah
};

CapacityStats capacity_stats(const std::vector<double>& capacities);

struct MetricsRow {
    long cycle = 0;
    double time_start = 0.0, time_end = 0.0;
    double fec = 0.0;          // cumulative at row end
    double fec_increment = 0.0;
    double throughput_ah = 0.0; // cell-level charge moved in this row
    EnergyLedger ledger;
    double efficiency = 0.0;
    double usable_energy = 0.0;
    CapacityStats capacity;
    double t_mean = 0.0, t_min = 0.0, t_max = 0.0, t_spread_max = 0.0; // K
    bool complete = false;
};

} // namespace gridtwin
