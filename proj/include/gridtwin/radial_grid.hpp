#pragma once

#include <span>
#include <vector>

namespace gridtwin {

// Vertex-centred finite-volume grid on the unit sphere: nodes at rho_k = k/N,
// node N on the particle surface. All quantities are for radius 1 and scale
// with R^3 (volumes) and R^2 (face areas, divided by 4 pi).
struct RadialGrid {
    explicit RadialGrid(int shells);

    int shells;
    double h;
    std::vector<double> rho;     // N+1 node positions
    std::vector<double> volume;  // N+1 control volumes, int rho^2 drho; sums to 1/3
    std::vector<double> face;    // N interior faces, rho_{k+1/2}^2
    // Row k: weights w with int_0^{rho_k} c rho^2 drho = sum_j w_j c_j, exact
    // for piecewise-quadratic profiles.
    std::vector<double> cumulative;

    std::size_t size() const { return rho.size(); }
    // Volume average from the control volumes; conservative with the scheme.
    double mean(std::span<const double> c) const;
    double cumulative_integral(int k, std::span<const double> c) const;
};

// Factorised backward-Euler operator V dc/dt = coeff * div(rho^2 grad c) with
// zero flux at the centre; surface flux enters through the right-hand side.
class DiffusionOperator {
public:
    void factor(const RadialGrid& grid, double coeff);
    // Solves in place; rhs holds V_k c_old_k plus any surface source.
    void solve(std::span<double> rhs) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_prime_;
    std::vector<double> inv_pivot_;
};

} // namespace gridtwin
