// Command-line front end: echo ensembles, direct Lyapunov runs, re-analysis
// of stored runs and the preset reproduction targets.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ergochron/config.hpp"
#include "ergochron/runner.hpp"

namespace {

using namespace ergochron;

// One line on stderr that scripts can split on tabs.
int fail(const std::string& kind, const std::string& message, int status = 1)
{
    std::string flat = message;
    for (char& c : flat)
        if (c == '\n' || c == '\t')
            c = ' ';
    std::cerr << "error\t" << kind << "\t" << flat << "\n";
    return status;
}

struct Globals {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::vector<std::string> settings;
};

std::pair<std::string, std::string> split_setting(const std::string& s)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

RunConfig resolve(const Globals& g)
{
    RunConfig c = g.config ? load_config(*g.config) : RunConfig{};
    for (const auto& s : g.settings) {
        const auto [k, v] = split_setting(s);
        apply_setting(c, k, v);
    }
    if (g.seed)
        c.master_seed = *g.seed;
    if (g.workers)
        c.workers = *g.workers;
    if (g.out)
        c.out = *g.out;
    c.validate();
    return c;
}

void report(const RunManifest& m, const std::filesystem::path& dir)
{
    std::cout << "wrote " << m.artifacts.size() << " files to " << dir.string() << " in "
              << m.wall_seconds << " s with " << m.workers << " workers\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Loschmidt-echo ergodicity tests for the discrete Gross-Pitaevskii lattice"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "Run configuration file (key = value lines)");
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--workers", g.workers, "Worker threads (default: $ERGOCHRON_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--set", g.settings, "Override one config key (key=value); repeatable");

    auto* echo = app.add_subcommand("echo", "Run the echo ensemble (and the direct pipeline if enabled)");
    auto* lyap = app.add_subcommand("lyapunov", "Run the direct tangent-dynamics pipeline only");
    auto* analyze = app.add_subcommand("analyze", "Recompute curves, fits and summary from a run directory");
    auto* repro = app.add_subcommand("reproduce", "Preset runs: table1, fig2, fig3 or fig4");
    std::string target;
    repro->add_option("target", target, "table1 | fig2 | fig3 | fig4")
        ->required()
        ->check(CLI::IsMember({"table1", "fig2", "fig3", "fig4"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help();
        return fail("usage", e.what(), 2);
    }

    try {
        if (echo->parsed()) {
            const RunConfig c = resolve(g);
            report(run_ensemble(c), c.out);
        } else if (lyap->parsed()) {
            RunConfig c = resolve(g);
            c.lyapunov.enabled = true;
            report(run_lyapunov(c), c.out);
        } else if (analyze->parsed()) {
            std::filesystem::path dir;
            if (g.out)
                dir = *g.out;
            else if (g.config)
                dir = load_config(*g.config).out;
            else
                return fail("usage", "analyze needs --out <run directory>", 2);
            for (const auto& name : analyze_directory(dir))
                std::cout << "wrote " << (dir / name).string() << "\n";
        } else if (repro->parsed()) {
            if (g.config)
                return fail("usage", "reproduce uses preset configs; use --set to override keys", 2);
            ReproduceOptions o;
            if (g.seed)
                o.seed = *g.seed;
            if (g.workers)
                o.workers = *g.workers;
            if (g.out)
                o.out = *g.out;
            for (const auto& s : g.settings)
                o.overrides.push_back(split_setting(s));
            reproduce(target_from_string(target), o);
            std::cout << "reproduce " << target << ": results in " << o.out.string() << "\n";
        }
    } catch (const RealizationError& e) {
        return fail("realization", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("config", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
