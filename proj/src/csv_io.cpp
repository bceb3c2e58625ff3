#include "gridtwin/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gridtwin/errors.hpp"

namespace gridtwin {

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DomainError("no column named " + name);
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        const std::string& s = r.at(c);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw DomainError("column " + name + " holds a non-numeric value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DomainError(path.string() + " is empty");
    t.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_line(line);
        if (row.size() != t.header.size())
            throw DomainError(path.string() + ": row width " + std::to_string(row.size()) + " does not match header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    auto put = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out << ',';
            out << r[i];
        }
        out << '\n';
    };
    put(table.header);
    for (const auto& r : table.rows) put(r);
    if (!out) throw ConfigError("cannot write " + path.string());
}

CsvTable metrics_table(const std::vector<MetricsRow>& rows) {
    CsvTable t;
    t.header = {"cycle", "time_start_s", "time_end_s", "fec", "fec_increment", "throughput_ah", "grid_in_j",
                "grid_out_j", "delta_stored_j"};
    for (int i = 0; i < loss_item_count; ++i)
        t.header.push_back(std::string("loss_") + loss_item_name(static_cast<LossItem>(i)) + "_j");
    for (const char* c : {"closure_error", "efficiency", "usable_energy", "capacity_mean_ah", "capacity_sd_ah",
                          "capacity_min_ah", "capacity_max_ah", "t_mean_k", "t_min_k", "t_max_k", "t_spread_max_k",
                          "complete"})
        t.header.emplace_back(c);
    for (const MetricsRow& r : rows) {
        std::vector<std::string> row = {std::to_string(r.cycle), format_double(r.time_start),
                                        format_double(r.time_end), format_double(r.fec),
                                        format_double(r.fec_increment), format_double(r.throughput_ah),
                                        format_double(r.ledger.grid_in), format_double(r.ledger.grid_out),
                                        format_double(r.ledger.delta_stored)};
        for (int i = 0; i < loss_item_count; ++i) row.push_back(format_double(r.ledger.losses[i]));
        row.push_back(format_double(r.ledger.closure_error()));
        row.push_back(format_double(r.efficiency));
        row.push_back(format_double(r.usable_energy));
        if (r.capacity.measured) {
            for (double v : {r.capacity.mean, r.capacity.sd, r.capacity.min, r.capacity.max})
                row.push_back(format_double(v));
        } else {
            row.insert(row.end(), 4, "");
        }
        for (double v : {r.t_mean, r.t_min, r.t_max, r.t_spread_max}) row.push_back(format_double(v));
        row.push_back(r.complete ? "1" : "0");
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable ledger_table(const std::vector<MetricsRow>& rows, const EnergyLedger& totals) {
    CsvTable t;
    t.header = {"cycle", "item", "energy_j"};
    auto emit = [&](const std::string& cycle, const EnergyLedger& l) {
        t.rows.push_back({cycle, "grid_in", format_double(l.grid_in)});
        t.rows.push_back({cycle, "grid_out", format_double(l.grid_out)});
        t.rows.push_back({cycle, "delta_stored", format_double(l.delta_stored)});
        for (int i = 0; i < loss_item_count; ++i)
            t.rows.push_back({cycle, loss_item_name(static_cast<LossItem>(i)), format_double(l.losses[i])});
        t.rows.push_back({cycle, "closure_residual", format_double(l.closure_residual())});
    };
    for (const MetricsRow& r : rows) emit(std::to_string(r.cycle), r.ledger);
    emit("total", totals);
    return t;
}

CsvTable temperature_table(const Simulation& sim) {
    CsvTable t;
    t.header = {"time_s", "node", "kind", "temperature_k"};
    const auto& names = sim.temperature_names();
    const auto& kinds = sim.temperature_kinds();
    for (const TemperatureFrame& f : sim.temperature_log())
        for (std::size_t i = 0; i < f.T.size(); ++i)
            t.rows.push_back({format_double(f.time), names.at(i), kinds.at(i), format_double(f.T[i])});
    return t;
}

CsvTable capacity_table(const CapacitySnapshot& snap) {
    CsvTable t;
    t.header = {"cell", "capacity_ah"};
    for (std::size_t i = 0; i < snap.capacities.size(); ++i)
        t.rows.push_back({std::to_string(i + 1), format_double(snap.capacities[i])});
    return t;
}

CsvTable trace_table(const Simulation& sim) {
    CsvTable t;
    t.header = {"time_s", "unit", "current_a", "voltage_v"};
    const auto& cells = sim.cells();
    for (const TraceFrame& f : sim.traces()) {
        const std::string time = format_double(f.time);
        t.rows.push_back({time, "pack", format_double(f.pack_current), format_double(f.pack_voltage)});
        for (std::size_t i = 0; i < f.current.size(); ++i)
            t.rows.push_back({time, cells.at(i)->name, format_double(f.current[i]), format_double(f.voltage[i])});
    }
    return t;
}

void write_outputs(const Simulation& sim, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_csv(dir / "metrics.csv", metrics_table(sim.rows()));
    write_csv(dir / "ledger.csv", ledger_table(sim.rows(), sim.totals()));
    write_csv(dir / "temperatures.csv", temperature_table(sim));
    for (const CapacitySnapshot& s : sim.capacity_snapshots())
        write_csv(dir / ("capacity_hist_" + std::to_string(s.cycle) + ".csv"), capacity_table(s));
    if (!sim.traces().empty()) write_csv(dir / "traces.csv", trace_table(sim));
}

} // namespace gridtwin
