#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridtwin/engine.hpp"

namespace gridtwin {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; // throws when absent
    std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Column sets are fixed per file kind.
CsvTable metrics_table(const std::vector<MetricsRow>& rows);
CsvTable ledger_table(const std::vector<MetricsRow>& rows, const EnergyLedger& totals);
CsvTable temperature_table(const Simulation& sim);
CsvTable capacity_table(const CapacitySnapshot& snap);
CsvTable trace_table(const Simulation& sim);

// metrics.csv, ledger.csv, temperatures.csv, capacity_hist_<cycle>.csv and,
// when traces were logged, traces.csv.
void write_outputs(const Simulation& sim, const std::filesystem::path& dir);

} // namespace gridtwin
