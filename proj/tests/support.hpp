#pragma once

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "gridtwin/cell.hpp"
#include "gridtwin/engine.hpp"
#include "gridtwin/pack.hpp"
#include "gridtwin/presets.hpp"

namespace gt = gridtwin;

inline const gt::ParameterSet& shipped() {
    static const gt::ParameterSet p = gt::default_parameters();
    return p;
}

inline std::shared_ptr<const gt::RadialGrid> grid_of(int shells) {
    return std::make_shared<const gt::RadialGrid>(shells);
}

inline gt::Cell make_cell(double soc = 0.5, double T = 298.15, int shells = 10) {
    gt::CellParams p = shipped().cell;
    p.shells = shells;
    return gt::Cell(p, shipped().ocv, grid_of(shells), soc, T);
}

inline gt::Cell make_cell(const gt::CellParams& p, double soc = 0.5, double T = 298.15) {
    return gt::Cell(p, shipped().ocv, grid_of(p.shells), soc, T);
}

inline std::unique_ptr<gt::CellUnit> make_unit(const gt::CellParams& p, double soc = 0.5) {
    return std::make_unique<gt::CellUnit>(make_cell(p, soc));
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rms_rel(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) / b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n));
}

// Least-squares slope of log(y) against log(x).
inline double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
