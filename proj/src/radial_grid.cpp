#include "gridtwin/radial_grid.hpp"

#include <array>
#include <cmath>

#include "gridtwin/errors.hpp"

namespace gridtwin {

RadialGrid::RadialGrid(int n) : shells(n), h(1.0 / n) {
    if (n < 2) throw DomainError("radial grid needs at least two shells");
    const std::size_t m = static_cast<std::size_t>(n) + 1;
    rho.resize(m);
    volume.resize(m);
    face.resize(static_cast<std::size_t>(n));
    for (int k = 0; k <= n; ++k) rho[k] = k * h;
    for (int k = 0; k <= n; ++k) {
        double lo = k == 0 ? 0.0 : rho[k] - 0.5 * h;
        double hi = k == n ? 1.0 : rho[k] + 0.5 * h;
        volume[k] = (hi * hi * hi - lo * lo * lo) / 3.0;
    }
    for (int k = 0; k < n; ++k) {
        double r = rho[k] + 0.5 * h;
        face[k] = r * r;
    }

    // Quadratic interpolation per interval through three neighbouring nodes,
    // integrated with 3-point Gauss-Legendre (exact for the degree-4 integrand).
    static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    cumulative.assign(m * m, 0.0);
    std::vector<double> running(m, 0.0);
    for (int iv = 0; iv < n; ++iv) {
        int s0 = iv + 2 <= n ? iv : iv - 1;
        const double a = rho[iv], b = rho[iv + 1];
        for (int g = 0; g < 3; ++g) {
            double r = 0.5 * (a + b) + 0.5 * (b - a) * gx[g];
            double w = 0.5 * (b - a) * gw[g] * r * r;
            for (int p = 0; p < 3; ++p) {
                double basis = 1.0;
                for (int q = 0; q < 3; ++q)
                    if (q != p) basis *= (r - rho[s0 + q]) / (rho[s0 + p] - rho[s0 + q]);
                running[s0 + p] += w * basis;
            }
        }
        for (std::size_t j = 0; j < m; ++j) cumulative[(iv + 1) * m + j] = running[j];
    }
}

double RadialGrid::mean(std::span<const double> c) const {
    double s = 0.0;
    for (std::size_t k = 0; k < volume.size(); ++k) s += volume[k] * c[k];
    return 3.0 * s;
}

double RadialGrid::cumulative_integral(int k, std::span<const double> c) const {
    const std::size_t m = size();
    const double* w = &cumulative[static_cast<std::size_t>(k) * m];
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += w[j] * c[j];
    return s;
}

void DiffusionOperator::factor(const RadialGrid& grid, double coeff) {
    const std::size_t m = grid.size();
    lower_.resize(m);
    upper_prime_.resize(m);
    inv_pivot_.resize(m);
    const double g_scale = coeff / grid.h;
    double prev_upper_prime = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double g_lo = k == 0 ? 0.0 : g_scale * grid.face[k - 1];
        double g_hi = k + 1 == m ? 0.0 : g_scale * grid.face[k];
        double diag = grid.volume[k] + g_lo + g_hi;
        lower_[k] = -g_lo;
        double pivot = diag - lower_[k] * prev_upper_prime;
        inv_pivot_[k] = 1.0 / pivot;
        upper_prime_[k] = -g_hi * inv_pivot_[k];
        prev_upper_prime = upper_prime_[k];
    }
}

void DiffusionOperator::solve(std::span<double> d) const {
    const std::size_t m = inv_pivot_.size();
    d[0] *= inv_pivot_[0];
    for (std::size_t k = 1; k < m; ++k) d[k] = (d[k] - lower_[k] * d[k - 1]) * inv_pivot_[k];
    for (std::size_t k = m - 1; k-- > 0;) d[k] -= upper_prime_[k] * d[k + 1];
}

} // namespace gridtwin
