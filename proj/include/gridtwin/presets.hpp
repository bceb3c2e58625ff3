#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gridtwin/scenario.hpp"

namespace gridtwin {

// GRIDTWIN_DATA overrides the compiled-in data directory.
std::filesystem::path data_dir();
ParameterSet default_parameters();

inline constexpr double contact_cell = 7.5e-6;  // cell to block, block to module
inline constexpr double contact_module = 2.5e-4; // module to rack, rack to bus

TopologySpec cell_topology();
TopologySpec block_topology(int parallel = 7, double contact = contact_cell);
TopologySpec module_topology(int series = 20, int parallel = 7, double contact = contact_cell);
TopologySpec rack_topology(int modules = 15, double contact_scale = 1.0);
TopologySpec container_topology(int racks = 9, double contact_scale = 1.0);
// One cell standing for a series x parallel array.
TopologySpec scaled_topology(int series, int parallel);

// CC charge and discharge between the cell voltage limits, forever.
Protocol cc_cycling(double rate_c = 1.0);
// CCCV charge to the upper limit, CC discharge to the lower one.
Protocol cccv_cycling(double rate_c = 1.0);
// Two cycles a day from midnight in fixed slots summing to 24 h.
Protocol daily_profile();
Protocol rest_protocol(double seconds);

struct PresetOptions {
    std::string scale = "module"; // cell, block, module or rack
    long cycles = -1;             // overrides the study default when >= 0
    double days = -1.0;
    std::uint64_t seed = 1;
    double dt = 0.0;              // overrides the study default when > 0
};

std::vector<std::string> preset_names();
// Each preset yields one scenario per compared variant.
std::vector<Scenario> make_preset(const std::string& name, const PresetOptions& options = {});

} // namespace gridtwin
