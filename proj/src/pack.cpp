#include "gridtwin/pack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridtwin/errors.hpp"

namespace gridtwin {

UnitResponse CellUnit::trial(double I) {
    const CellTrial t = cell.trial(I);
    return {t.voltage, t.resistance, t.voltage, t.voltage, t.saturated};
}

void CellUnit::commit(double I) {
    last = cell.commit(I);
    voltage_ = last.voltage;
    current_ = I;
}

Group::Group(GroupKind kind, std::vector<std::unique_ptr<Unit>> children, std::vector<double> contact_r)
    : kind_(kind), children_(std::move(children)), contact_r_(std::move(contact_r)) {
    const std::size_t n = children_.size();
    if (n == 0) throw ConfigError("group has no children");
    if (kind_ == GroupKind::parallel && n < 2) throw ConfigError("parallel group needs at least two children");
    if (kind_ == GroupKind::scaled && n != 1) throw ConfigError("scaled group wraps exactly one child");
    if (contact_r_.empty()) contact_r_.assign(n, 0.0);
    if (contact_r_.size() != n) throw ConfigError("one contact resistance per child required");
    cumulative_r_.resize(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(contact_r_[j] >= 0.0)) throw ConfigError("contact resistance must be non-negative");
        acc += contact_r_[j];
        cumulative_r_[j] = acc;
        if (contact_r_[j] != 0.0) zero_contacts_ = false;
    }
    responses_.resize(n);
    currents_.assign(n, 0.0);
    paths_.assign(n, 0.0);
    pi.integral_error.assign(n, 0.0);
    double v = 0.0;
    for (auto& c : children_) v += c->voltage();
    voltage_ = kind_ == GroupKind::parallel ? v / static_cast<double>(n) : v;
}

void Group::prepare(double dt) {
    dt_ = dt;
    has_trial_ = false;
    if (executor_) executor_->parallel_for(children_.size(), [&](std::size_t j) { children_[j]->prepare(dt); });
    else
        for (auto& c : children_) c->prepare(dt);
}

void Group::evaluate_children(const std::vector<double>& currents) {
    auto body = [&](std::size_t j) { responses_[j] = children_[j]->trial(currents[j]); };
    if (executor_) executor_->parallel_for(children_.size(), body);
    else
        for (std::size_t j = 0; j < children_.size(); ++j) body(j);
}

UnitResponse Group::trial(double I) {
    if (has_trial_ && trial_I_ == I) return trial_response_;
    UnitResponse out;
    const std::size_t n = children_.size();
    if (kind_ == GroupKind::series) {
        currents_.assign(n, I);
        evaluate_children(currents_);
        out.cell_v_max = -1e300;
        out.cell_v_min = 1e300;
        double v = 0.0, r = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const UnitResponse& c = responses_[j];
            v += c.voltage - contact_r_[j] * I;
            r += c.resistance + contact_r_[j];
            out.cell_v_max = std::max(out.cell_v_max, c.cell_v_max);
            out.cell_v_min = std::min(out.cell_v_min, c.cell_v_min);
            out.saturated = out.saturated || c.saturated;
        }
        out.voltage = v;
        out.resistance = r;
    } else if (kind_ == GroupKind::scaled) {
        const double p = scale_parallel, s = scale_series;
        currents_.assign(1, I / p);
        const UnitResponse c = children_[0]->trial(I / p);
        out = c;
        out.voltage = s * c.voltage - contact_r_[0] * I;
        out.resistance = s * c.resistance / p + contact_r_[0];
    } else {
        solve_split(I);
        out = trial_response_;
    }
    has_trial_ = true;
    trial_I_ = I;
    trial_response_ = out;
    return out;
}

void Group::factor_and_solve(const std::vector<double>& rhs_top, double rhs_sum, std::vector<double>& out) {
    // Bordered system [A 1; 1^T 0] [delta; U] = [rhs_top; rhs_sum] with
    // A_jm = r_j delta_jm + C_min(j,m); a second column gives dU/dI_total.
    const std::size_t n = children_.size();
    const std::size_t m = n + 1, w = m + 2;
    matrix_.assign(m * w, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) matrix_[j * w + k] = cumulative_r_[std::min(j, k)];
        matrix_[j * w + j] += std::max(responses_[j].resistance, 1e-9);
        matrix_[j * w + n] = 1.0;
        matrix_[j * w + m] = rhs_top[j];
        matrix_[n * w + j] = 1.0;
    }
    matrix_[n * w + m] = rhs_sum;
    matrix_[n * w + m + 1] = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(matrix_[r * w + col]) > std::abs(matrix_[piv * w + col])) piv = r;
        if (matrix_[piv * w + col] == 0.0) throw SolverError("singular parallel-split system");
        if (piv != col)
            for (std::size_t k = 0; k < w; ++k) std::swap(matrix_[piv * w + k], matrix_[col * w + k]);
        const double inv = 1.0 / matrix_[col * w + col];
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = matrix_[r * w + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < w; ++k) matrix_[r * w + k] -= f * matrix_[col * w + k];
        }
    }
    out.assign(2 * m, 0.0);
    for (std::size_t rhs = 0; rhs < 2; ++rhs) {
        for (std::size_t r = m; r-- > 0;) {
            double s = matrix_[r * w + m + rhs];
            for (std::size_t k = r + 1; k < m; ++k) s -= matrix_[r * w + k] * out[rhs * m + k];
            out[rhs * m + r] = s / matrix_[r * w + r];
        }
    }
}

void Group::solve_split(double I_total) {
    const std::size_t n = children_.size();
    if (committed_.size() != n) {
        currents_.assign(n, I_total / static_cast<double>(n));
    } else {
        // Warm start: previous split plus the change shared by admittance.
        double sum_prev = 0.0, sum_y = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum_prev += committed_[j];
            sum_y += 1.0 / last_r_[j];
        }
        double mean_int = 0.0;
        for (double e : pi.integral_error) mean_int += e;
        mean_int /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
            currents_[j] = committed_[j] + (I_total - sum_prev) * (1.0 / last_r_[j]) / sum_y +
                           pi.k_i * (pi.integral_error[j] - mean_int);
    }
    auto close_sum = [&] {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) s += currents_[j];
        currents_[n - 1] = I_total - s;
    };
    close_sum();

    const double target = 0.1 * pi.tolerance;
    double mean = 0.0;
    for (iterations_ = 1;; ++iterations_) {
        evaluate_children(currents_);
        double suffix = 0.0;
        std::vector<double>& S = work_;
        S.resize(n);
        for (std::size_t j = n; j-- > 0;) {
            suffix += currents_[j];
            S[j] = suffix;
        }
        double drop = 0.0;
        mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            drop += contact_r_[j] * S[j];
            paths_[j] = responses_[j].voltage - drop;
            mean += paths_[j];
        }
        mean /= static_cast<double>(n);
        residual_ = 0.0;
        for (std::size_t j = 0; j < n; ++j) residual_ = std::max(residual_, std::abs(paths_[j] - mean));
        residual_ /= std::max(std::abs(mean), 1e-3);
        if (residual_ <= target) break;
        if (iterations_ >= pi.max_iterations)
            throw SolverError("parallel current split did not converge after " + std::to_string(iterations_) +
                              " iterations (worst relative residual " + std::to_string(residual_) + ")");

        double sum = 0.0;
        for (double c : currents_) sum += c;
        if (zero_contacts_) {
            double sy = 0.0, spy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double y = 1.0 / std::max(responses_[j].resistance, 1e-9);
                sy += y;
                spy += paths_[j] * y;
            }
            const double U = (spy - (I_total - sum)) / sy;
            for (std::size_t j = 0; j < n; ++j)
                currents_[j] += pi.k_p * (paths_[j] - U) / std::max(responses_[j].resistance, 1e-9);
        } else {
            factor_and_solve(paths_, I_total - sum, delta_);
            for (std::size_t j = 0; j < n; ++j) currents_[j] += pi.k_p * delta_[j];
        }
        close_sum();
    }

    UnitResponse out;
    out.cell_v_max = -1e300;
    out.cell_v_min = 1e300;
    double sum_abs = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const UnitResponse& c = responses_[j];
        out.cell_v_max = std::max(out.cell_v_max, c.cell_v_max);
        out.cell_v_min = std::min(out.cell_v_min, c.cell_v_min);
        out.saturated = out.saturated || c.saturated;
        sum_abs += std::abs(currents_[j]);
        weighted += (paths_[j] - mean) * currents_[j];
    }
    // Current-weighted path voltage keeps V I equal to the delivered power.
    out.voltage = std::abs(I_total) > 0.01 * sum_abs && I_total != 0.0 ? mean + weighted / I_total : mean;
    if (zero_contacts_) {
        double sy = 0.0;
        for (const auto& c : responses_) sy += 1.0 / std::max(c.resistance, 1e-9);
        out.resistance = 1.0 / sy;
    } else {
        std::vector<double> zeros(n, 0.0);
        factor_and_solve(zeros, 0.0, delta_);
        out.resistance = -delta_[2 * (n + 1) - 1];
    }
    trial_response_ = out;
}

void Group::commit(double I) {
    if (!(has_trial_ && trial_I_ == I)) trial(I);
    const std::size_t n = children_.size();
    auto body = [&](std::size_t j) { children_[j]->commit(currents_[j]); };
    if (executor_) executor_->parallel_for(n, body);
    else
        for (std::size_t j = 0; j < n; ++j) body(j);

    if (kind_ == GroupKind::series) {
        double r = 0.0;
        for (double c : contact_r_) r += c;
        contact_power_ = I * I * r;
    } else if (kind_ == GroupKind::scaled) {
        contact_power_ = I * I * contact_r_[0];
    } else {
        double suffix = 0.0;
        contact_power_ = 0.0;
        for (std::size_t j = n; j-- > 0;) {
            suffix += currents_[j];
            contact_power_ += contact_r_[j] * suffix * suffix;
        }
        committed_ = currents_;
        last_r_.resize(n);
        double mean = 0.0;
        for (double p : paths_) mean += p;
        mean /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            last_r_[j] = std::max(responses_[j].resistance, 1e-9);
            pi.integral_error[j] += (paths_[j] - mean) * dt_;
        }
    }
    voltage_ = trial_response_.voltage;
    current_ = I;
    has_trial_ = false;
}

void Unit::save(BinaryWriter& w) const {
    w.put(voltage_);
    w.put(current_);
}

void Unit::load(BinaryReader& r) {
    voltage_ = r.get<double>();
    current_ = r.get<double>();
}

void CellUnit::save(BinaryWriter& w) const {
    Unit::save(w);
    cell.save(w);
}

void CellUnit::load(BinaryReader& r) {
    Unit::load(r);
    cell.load(r);
    last = CellStepRecord{};
}

void Group::save(BinaryWriter& w) const {
    Unit::save(w);
    w.put_vector(pi.integral_error);
    w.put_vector(committed_);
    w.put_vector(last_r_);
    w.put_vector(currents_);
    w.put_vector(paths_);
    w.put(contact_power_);
}

void Group::load(BinaryReader& r) {
    Unit::load(r);
    pi.integral_error = r.get_vector();
    committed_ = r.get_vector();
    last_r_ = r.get_vector();
    currents_ = r.get_vector();
    paths_ = r.get_vector();
    contact_power_ = r.get<double>();
    const std::size_t n = children_.size();
    if (pi.integral_error.size() != n || currents_.size() != n || paths_.size() != n ||
        (!committed_.empty() && committed_.size() != n) || last_r_.size() != committed_.size())
        throw CheckpointError("checkpoint does not match the group layout");
    has_trial_ = false;
}

namespace {

void collect(Unit& u, TreeIndex& idx) {
    if (CellUnit* c = u.as_cell()) {
        idx.cells.push_back(c);
        return;
    }
    Group* g = u.as_group();
    for (std::size_t j = 0; j < g->size(); ++j) collect(g->child(j), idx);
    idx.groups.push_back(g);
}

} // namespace

TreeIndex index_tree(Unit& root) {
    TreeIndex idx;
    collect(root, idx);
    return idx;
}

std::vector<double> solve_parallel_currents(Group& group, double I_total, double dt) {
    if (group.kind() != GroupKind::parallel) throw DomainError("group is not parallel");
    group.prepare(dt);
    group.trial(I_total);
    return group.child_currents();
}

} // namespace gridtwin
