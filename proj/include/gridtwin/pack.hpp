#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridtwin/cell.hpp"
#include "gridtwin/executor.hpp"

namespace gridtwin {

struct UnitResponse {
    double voltage = 0.0;
    double resistance = 0.0; // -dV/dI
    double cell_v_max = 0.0;
    double cell_v_min = 0.0;
    bool saturated = false;
};

class Group;
class CellUnit;

class Unit {
public:
    virtual ~Unit() = default;

    virtual void prepare(double dt) = 0;
    // May be called repeatedly; the last call before commit() with the same
    // current is reused by commit().
    virtual UnitResponse trial(double I) = 0;
    virtual void commit(double I) = 0;

    double voltage() const { return voltage_; }
    double current() const { return current_; }

    virtual Group* as_group() { return nullptr; }
    virtual CellUnit* as_cell() { return nullptr; }

    // Unit-local state only; children are saved by the caller.
    virtual void save(BinaryWriter& w) const;
    virtual void load(BinaryReader& r);

    std::string name;
    int thermal_node = -1;

protected:
    double voltage_ = 0.0;
    double current_ = 0.0;
};

class CellUnit final : public Unit {
public:
    explicit CellUnit(Cell c) : cell(std::move(c)) { voltage_ = cell.voltage(); }

    void prepare(double dt) override { cell.prepare(dt); }
    UnitResponse trial(double I) override;
    void commit(double I) override;
    CellUnit* as_cell() override { return this; }
    void save(BinaryWriter& w) const override;
    void load(BinaryReader& r) override;

    Cell cell;
    CellStepRecord last;
};

enum class GroupKind { series, parallel, scaled };

struct PiState {
    std::vector<double> integral_error; // V s per child
    double k_p = 1.0;   // multiplier on the decoupling admittance
    double k_i = 0.0;   // A/(V s) applied to the warm start
    double tolerance = 1e-4;
    int max_iterations = 50;
};

class Group final : public Unit {
public:
    Group(GroupKind kind, std::vector<std::unique_ptr<Unit>> children, std::vector<double> contact_r);

    void prepare(double dt) override;
    UnitResponse trial(double I) override;
    void commit(double I) override;
    Group* as_group() override { return this; }
    void save(BinaryWriter& w) const override;
    void load(BinaryReader& r) override;

    GroupKind kind() const { return kind_; }
    std::size_t size() const { return children_.size(); }
    Unit& child(std::size_t i) { return *children_[i]; }
    const std::vector<double>& contact_r() const { return contact_r_; }
    // Currents of the last solved or committed split, per child.
    const std::vector<double>& child_currents() const { return currents_; }
    // Path voltages of the last split (parallel groups).
    const std::vector<double>& path_voltages() const { return paths_; }
    double contact_power() const { return contact_power_; }
    int last_iterations() const { return iterations_; }
    double last_residual() const { return residual_; }

    void set_executor(Executor* e) { executor_ = e; }

    PiState pi;
    bool closed = false;
    int scale_series = 1;
    int scale_parallel = 1;

private:
    void solve_split(double I_total);
    void evaluate_children(const std::vector<double>& currents);
    void factor_and_solve(const std::vector<double>& rhs_top, double rhs_sum, std::vector<double>& out);

    GroupKind kind_;
    std::vector<std::unique_ptr<Unit>> children_;
    std::vector<double> contact_r_;
    std::vector<double> cumulative_r_;
    Executor* executor_ = nullptr;
    double dt_ = 0.0;

    std::vector<UnitResponse> responses_;
    std::vector<double> currents_, paths_, committed_, last_r_;
    std::vector<double> matrix_, work_, delta_;
    bool has_trial_ = false;
    double trial_I_ = 0.0;
    UnitResponse trial_response_;
    double contact_power_ = 0.0;
    int iterations_ = 0;
    double residual_ = 0.0;
    bool zero_contacts_ = true;
};

// Flattened views of a unit tree, children before parents.
struct TreeIndex {
    std::vector<CellUnit*> cells;
    std::vector<Group*> groups;
};

TreeIndex index_tree(Unit& root);

// Parallel-split solve for a bare list of path data, exposed for testing.
std::vector<double> solve_parallel_currents(Group& group, double I_total, double dt);

} // namespace gridtwin
