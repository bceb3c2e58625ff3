#pragma once

#include <filesystem>
#include <vector>

#include "gridtwin/scenario.hpp"

namespace gridtwin {

// Parameter file: cell, sei, stress, ocv, fan, ac, converter and
// thermal_coefficients blocks. OCV paths resolve against the file's directory.
ParameterSet load_parameter_file(const std::filesystem::path& path);

// Scenario file. `include:` lists files merged underneath this one;
// `preset:` starts from a bundled study and applies the remaining keys to
// every variant. Errors name the field and source line.
std::vector<Scenario> load_config(const std::filesystem::path& path);

// Stoichiometry of the cathode at 0 % that balances the lithium moved by the
// anode window.
double balanced_cathode_empty(const CellParams& p);

} // namespace gridtwin
