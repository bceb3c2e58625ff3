#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "gridtwin/ancillary.hpp"
#include "gridtwin/cell_params.hpp"
#include "gridtwin/pack.hpp"
#include "gridtwin/thermal_control.hpp"
#include "gridtwin/variability.hpp"

namespace gridtwin {

inline constexpr double unlimited = std::numeric_limits<double>::infinity();

// Thermal coefficients the source data does not fix; order-of-magnitude defaults.
struct ThermalCoefficients {
    double h_cell_cell = 50.0;              // W/(m^2 K) between stacked cells
    double h_wall = 20.0;                   // W/(m^2 K) edge cell to enclosure
    double convective_fraction = 1.0;       // share of A_cell swept by air
    double group_heat_capacity = 100.0;     // J/K per cell served
    double group_exterior_area = 0.002;     // m^2 per cell enclosed
    double container_heat_capacity = 200.0; // J/K per cell
    double container_wall = 0.05;           // W/K per cell to the environment
    double chiller_power = 1.0;             // W electrical per cell at full command

    void validate() const;
};

struct ParameterSet {
    CellParams cell;
    std::shared_ptr<const OcvTables> ocv;
    FanParams fan_per_cell;
    AcParams ac;
    ConverterReference converter;
    ThermalCoefficients thermal;
};

enum class TopologyKind { cell, series, parallel, scaled };

struct TopologySpec {
    TopologyKind kind = TopologyKind::cell;
    std::string name;
    int count = 1;                 // children of a series or parallel level
    int scale_series = 1;          // scaled level only
    int scale_parallel = 1;
    double contact_r = 0.0;        // Ohm per child connection
    std::vector<double> contact_list; // overrides contact_r per child when set
    bool closed = false;
    std::vector<TopologySpec> child; // exactly one for group levels

    std::size_t cell_count() const;  // physical cells represented
    std::size_t model_cells() const; // cell models instantiated
    int series_count() const;        // cells in series along one path
    int parallel_count() const;      // paths in parallel
    void validate() const;
};

struct CellOverride {
    std::size_t index = 0;
    double capacity = 1.0;   // factor on electrode areas
    double resistance = 1.0; // factor on specific electrode resistances
    double degradation = 1.0;
};

enum class StepMode { rest, cc, cccv };

struct ProtocolStep {
    StepMode mode = StepMode::rest;
    double rate_c = 0.0;          // pack C-rate, positive discharges
    double duration_s = unlimited;
    double v_limit = 0.0;         // cell-level limit, 0 picks V_min or V_max
    double i_cutoff_c = 0.05;     // CV end, as C-rate
    bool hold_slot = false;       // keep the full duration, resting after a limit
    std::string label;
};

struct Protocol {
    std::vector<ProtocolStep> steps;
    long repeat = -1; // -1 repeats until a stop condition

    void validate() const;
};

struct StopConditions {
    long cycles = -1;
    double time_s = unlimited;
    double fec = unlimited;
    double capacity_floor = 0.0; // fraction of initial mean capacity
    double wall_clock_s = unlimited;
    bool end_of_life = true;
};

struct Logging {
    long capacity_every = 0;        // cycles between capacity checks, 0 off
    bool capacity_at_start = true;
    double temperature_every_s = 0; // 0 off
    double trace_every_s = 0;       // per-cell current and voltage, 0 off
};

enum class ThermalMode { isothermal, individual_cell, coupled };

struct ThermalSetup {
    ThermalMode mode = ThermalMode::isothermal;
    double T_initial = 298.15;
    Environment env;
    Strategy strategy = Strategy::always_on;
    ControlThresholds thresholds;
};

struct Balancing {
    double period_s = 0.0;       // 0 disables
    double current_c = 0.05;     // cell C-rate of the bleed current
    double tolerance_v = 1e-3;
};

struct Scenario {
    std::string name = "scenario";
    ParameterSet params;
    TopologySpec topology;
    double terminal_r = 0.0;
    bool vary = false;
    VariationSpec variation;
    std::vector<CellOverride> overrides;
    double initial_soc = 0.5;
    double dt = 2.0;
    double dt_rest = 0.0; // 0 uses dt
    bool degradation = true;
    double degradation_acceleration = 1.0;
    bool converter = true;
    ThermalSetup thermal;
    Protocol protocol;
    StopConditions stop;
    Logging logging;
    Balancing balancing;
    double pi_k_p = 1.0;
    double pi_k_i = 0.0;
    double pi_tolerance = 1e-4;
    int pi_max_iterations = 50;
    double capacity_dt = 10.0;
    long checkpoint_every = 0; // cycles, 0 off

    void validate() const;
};

} // namespace gridtwin
