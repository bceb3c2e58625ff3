#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridtwin/checkpoint.hpp"
#include "gridtwin/config.hpp"
#include "gridtwin/csv_io.hpp"
#include "gridtwin/engine.hpp"
#include "gridtwin/errors.hpp"
#include "gridtwin/presets.hpp"

namespace fs = std::filesystem;
using namespace gridtwin;

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;

struct Options {
    std::string config, preset, out, resume, scale = "module", variant;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    long cycles = -1;
    double days = -1.0, dt = 0.0;
    long checkpoint_every = -1;
};

fs::path output_root(const Options& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("GRIDTWIN_OUT"); env && *env) return env;
    return "gridtwin_out";
}

std::vector<Scenario> scenarios_for(const Options& o) {
    std::vector<Scenario> list;
    if (!o.config.empty()) {
        list = load_config(o.config);
        for (Scenario& s : list) {
            if (o.cycles >= 0) s.stop.cycles = o.cycles;
            if (o.days > 0.0) s.stop.time_s = o.days * 86400.0;
            if (o.dt > 0.0) s.dt = o.dt;
        }
    } else {
        PresetOptions p;
        p.scale = o.scale;
        p.cycles = o.cycles;
        p.days = o.days;
        p.dt = o.dt;
        if (o.seed) p.seed = *o.seed;
        list = make_preset(o.preset, p);
    }
    for (Scenario& s : list) {
        if (o.seed) s.variation.seed = *o.seed;
        if (o.checkpoint_every >= 0) s.checkpoint_every = o.checkpoint_every;
    }
    if (!o.variant.empty()) {
        std::vector<Scenario> kept;
        for (Scenario& s : list)
            if (s.name == o.variant) kept.push_back(std::move(s));
        if (kept.empty()) throw ConfigError("no variant named '" + o.variant + "'");
        list = std::move(kept);
    }
    if (!o.resume.empty() && list.size() != 1)
        throw ConfigError("--resume needs a single scenario; pick one with --variant");
    return list;
}

int run_one(Scenario sc, const fs::path& dir, const Options& o) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    const std::string name = sc.name;
    const long every = sc.checkpoint_every;
    Simulation sim(std::move(sc), o.threads);
    if (!o.resume.empty()) sim.restore(read_file(o.resume));
    const fs::path ckpt = dir / "checkpoint.bin";
    if (every > 0)
        sim.on_row = [&](Simulation& s, const MetricsRow& row) {
            if (row.cycle % every == 0) write_file(ckpt.string(), s.checkpoint());
        };
    const auto start = std::chrono::steady_clock::now();
    try {
        sim.run();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        write_file(ckpt.string(), sim.checkpoint());
        write_outputs(sim, dir);
        std::cerr << name << ": solver failure at t=" << sim.time() << " s: " << e.what() << "\n"
                  << "checkpoint written to " << ckpt.string() << "\n";
        return exit_solver;
    }
    write_outputs(sim, dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << name << ": " << sim.rows().size() << " rows, " << sim.time() / 3600.0 << " h simulated, stopped by "
              << sim.stop_reason() << " (" << wall << " s wall)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-scale battery digital twin"};
    app.require_subcommand(1);
    Options o;

    CLI::App* sim = app.add_subcommand("simulate", "run a scenario or a bundled study");
    auto* cfg = sim->add_option("--config", o.config, "scenario file");
    auto* pre = sim->add_option("--preset", o.preset, "bundled study: fig5, fig8, contact_r, cell2cell, thermal, "
                                                      "control_week, control_life");
    cfg->excludes(pre);
    sim->add_option("--out", o.out, "output directory (default: $GRIDTWIN_OUT or ./gridtwin_out)");
    sim->add_option("--seed", o.seed, "seed for cell-to-cell variation");
    sim->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--resume", o.resume, "continue from a checkpoint file");
    sim->add_option("--scale", o.scale, "preset scale: cell, block, module, rack or container");
    sim->add_option("--cycles", o.cycles, "stop after this many cycles");
    sim->add_option("--days", o.days, "stop after this many simulated days");
    sim->add_option("--dt", o.dt, "electrical time step in seconds");
    sim->add_option("--variant", o.variant, "run only the named variant");
    sim->add_option("--checkpoint-every", o.checkpoint_every, "write a checkpoint every N cycles");

    CLI::App* list = app.add_subcommand("presets", "list bundled studies and their variants");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (list->parsed()) {
            for (const std::string& n : preset_names()) {
                std::cout << n << ":";
                for (const Scenario& s : make_preset(n)) std::cout << " " << s.name;
                std::cout << "\n";
            }
            return 0;
        }
        if (o.config.empty() && o.preset.empty()) throw ConfigError("simulate needs --config or --preset");
        std::vector<Scenario> scenarios = scenarios_for(o);
        const fs::path root = output_root(o);
        int status = 0;
        for (Scenario& s : scenarios) {
            const fs::path dir = scenarios.size() > 1 ? root / s.name : root;
            status = std::max(status, run_one(std::move(s), dir, o));
        }
        return status;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_solver;
    }
}
