#pragma once

#include <cstdint>
#include <vector>

#include "gridtwin/cell_params.hpp"

namespace gridtwin {

struct VariationSpec {
    double sd_capacity = 0.004;
    double sd_resistance = 0.025;
    double sd_degradation = 0.10;
    double rho = 0.7; // correlation of the (D_sei, k_sei) pair
    std::uint64_t seed = 1;

    void validate() const;
};

struct CellFactors {
    double capacity = 1.0;
    double resistance = 1.0;
    double D_sei = 1.0;
    double k_sei = 1.0;
    double beta_2 = 1.0;
};

// Each channel draws from its own stream so that switching one spread off
// leaves the others unchanged for the same seed.
std::vector<CellFactors> sample_factors(const VariationSpec& spec, std::size_t n_cells);

CellParams apply_factors(const CellParams& base, const CellFactors& f);

std::vector<CellParams> sample_population(const CellParams& base, const VariationSpec& spec, std::size_t n_cells);

} // namespace gridtwin
