#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gridtwin/ledger.hpp"
#include "gridtwin/pack.hpp"
#include "gridtwin/scenario.hpp"
#include "gridtwin/thermal_network.hpp"

namespace gridtwin {

struct CapacitySnapshot {
    long cycle = 0;
    double time = 0.0;
    std::vector<double> capacities; // Ah per model cell
};

struct TemperatureFrame {
    double time = 0.0;
    std::vector<double> T; // K, one per logged node
};

struct TraceFrame {
    double time = 0.0;
    double pack_current = 0.0, pack_voltage = 0.0;
    std::vector<double> current, voltage; // per model cell
};

// Electrical summary of one committed step, handed to the observer.
struct StepInfo {
    double dt = 0.0;
    double current = 0.0;   // pack terminal, positive discharges
    double voltage = 0.0;   // at the converter DC side
    double p_dc = 0.0;      // W into the converter
    double p_aux = 0.0;     // W for fans and AC
    double p_converter = 0.0;
    std::size_t step_index = 0;
    int phase = 0;          // 0 constant current, 1 constant voltage, 2 rest
};

// Charge accepted by a CC then CV charge of a bare unit. Currents are in A
// with the discharge-positive convention, so rate_a is positive here and
// applied as a charge. Returns Ah.
struct CccvResult {
    double charge_ah = 0.0;
    double time_s = 0.0;
};
CccvResult cccv_charge(Unit& unit, double rate_a, double v_limit, double i_cutoff_a, double dt,
                       double max_time_s = 4.0 * 3600.0);
// Discharge counterpart: CC at rate_a then CV at v_limit down to the cutoff.
CccvResult cccv_discharge(Unit& unit, double rate_a, double v_limit, double i_cutoff_a, double dt,
                          double max_time_s = 4.0 * 3600.0);

// Capacity check on a copy of the cell at T_ref with degradation frozen.
double measure_cell_capacity(const Cell& cell, double dt);

class Simulation {
public:
    explicit Simulation(Scenario scenario, int threads = 1);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    // Advances by one time step or one protocol transition. Returns false
    // once a stop condition or the end of the protocol has been reached.
    bool advance();
    void run();
    // Closes the open row if it holds any time and marks the run finished.
    void finish(const std::string& reason);

    bool finished() const { return finished_; }
    const std::string& stop_reason() const { return stop_reason_; }
    double time() const { return time_; }
    double fec() const { return fec_; }
    long completed_cycles() const { return static_cast<long>(rows_.size()); }

    const Scenario& scenario() const { return sc_; }
    Unit& root() { return *root_; }
    const std::vector<CellUnit*>& cells() const { return tree_.cells; }
    const std::vector<Group*>& groups() const { return tree_.groups; }
    // Physical cells each model cell stands for.
    const std::vector<double>& cell_weights() const { return cell_weight_; }
    ThermalNetwork* thermal() { return network_.get(); }
    const ConverterParams& converter() const { return converter_; }

    const std::vector<MetricsRow>& rows() const { return rows_; }
    const MetricsRow& open_row() const { return row_; }
    const EnergyLedger& totals() const { return totals_; }
    const std::vector<CapacitySnapshot>& capacity_snapshots() const { return snapshots_; }
    const std::vector<TemperatureFrame>& temperature_log() const { return temperatures_; }
    const std::vector<std::string>& temperature_names() const { return temperature_names_; }
    const std::vector<std::string>& temperature_kinds() const { return temperature_kinds_; }
    const std::vector<TraceFrame>& traces() const { return traces_; }

    double pack_one_c() const { return one_c_; }
    double nominal_energy_j() const; // Q_nom V_nom per physical cell, summed
    std::size_t physical_cells() const { return physical_cells_; }

    std::vector<double> measure_capacities();
    // Bleeds every cell above the lowest rest voltage down to it. Returns J.
    double balance();

    std::vector<std::uint8_t> checkpoint() const;
    void restore(const std::vector<std::uint8_t>& bytes);

    std::function<void(Simulation&, const StepInfo&)> observer;
    // Called after each completed row, e.g. for periodic checkpoints.
    std::function<void(Simulation&, const MetricsRow&)> on_row;

private:
    struct Actuator {
        bool is_ac = false;
        int fan = -1;   // network fan
        int node = -1;  // local temperature node
        std::size_t cell_begin = 0, cell_end = 0;
        double chiller_power = 0.0; // W electrical at full command
        Latch latch;
        double command = 0.0;
    };

    struct Cursor {
        std::size_t step = 0;
        long repeat = 0;
        double elapsed = 0.0;
        int phase = 0;
    };

    void build_tree();
    void build_thermal();
    void apply_control();
    double aux_power() const;
    void commit_step(double dt, double I, int phase);
    void thermal_update(double dt);
    void close_row(bool complete);
    void start_row();
    void log_frames();
    bool check_stop();
    double step_current(const ProtocolStep& s) const;
    double limit_for(const ProtocolStep& s, bool charging) const;
    void next_step();
    std::uint64_t fingerprint() const;

    bool do_cc(const ProtocolStep& s, double remaining);
    bool do_cv(const ProtocolStep& s, double remaining);
    void do_rest(double remaining);

    Scenario sc_;
    std::unique_ptr<Executor> executor_;
    std::unique_ptr<Unit> root_;
    TreeIndex tree_;
    std::vector<double> cell_weight_, group_weight_;
    std::size_t physical_cells_ = 0;
    double one_c_ = 0.0;
    bool has_converter_ = false;
    ConverterParams converter_;

    std::unique_ptr<ThermalNetwork> network_;
    std::vector<int> cell_node_;
    std::vector<int> group_node_; // compartment receiving each group's contact heat
    int container_node_ = -1;
    std::vector<Actuator> actuators_;

    Cursor cursor_;
    double time_ = 0.0;
    double fec_ = 0.0;
    double cv_current_ = 0.0; // last regulated current, warm start for the next CV step
    bool finished_ = false;
    std::string stop_reason_;
    bool row_has_discharge_ = false;
    double row_T_integral_ = 0.0;
    double next_balance_ = 0.0;
    double next_temperature_log_ = 0.0;
    double next_trace_log_ = 0.0;
    double initial_capacity_mean_ = 0.0;
    double last_capacity_mean_ = 0.0;
    std::size_t step_counter_ = 0;
    int stalled_ = 0; // protocol transitions since time last advanced

    MetricsRow row_;
    EnergyLedger totals_;
    std::vector<MetricsRow> rows_;
    std::vector<CapacitySnapshot> snapshots_;
    std::vector<TemperatureFrame> temperatures_;
    std::vector<std::string> temperature_names_, temperature_kinds_;
    std::vector<TraceFrame> traces_;
    std::chrono::steady_clock::time_point wall_start_;
};

} // namespace gridtwin
