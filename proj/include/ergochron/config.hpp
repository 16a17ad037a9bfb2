#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>

#include "ergochron/analysis.hpp"
#include "ergochron/dynamics.hpp"
#include "ergochron/echo.hpp"
#include "ergochron/lattice.hpp"

namespace ergochron {

struct LyapunovConfig {
    bool enabled = true;
    double T = 2e4;             ///< total recorded length, split evenly over chains
    double dt = 1e-3;
    double dt_r = 0.1;
    std::optional<double> burn_in;  ///< unset: automatic
    int chains = 4;
    int max_lag = 200;
};

struct FitConfig {
    double rise = 5.0;
    double margin = 3.0;
    bool top_decile_cut = true;
    int bootstrap = 200;
};

/// Everything that determines a run. Text form: one `key = value` per line,
/// dotted section prefixes, `#` comments; see to_text for the full key set.
struct RunConfig {
    std::string label;  ///< empty: derived from the lattice
    LatticeSpec lattice{{10, 10}, Boundary::periodic};
    ModelParams params;
    EchoProtocol protocol;
    long long ensemble_size = 200;
    std::uint64_t master_seed = 1;
    LyapunovConfig lyapunov;
    FitConfig fit;
    VerdictPolicy verdict;
    std::filesystem::path out = "out";
    int workers = 0;  ///< 0: hardware concurrency

    RunConfig();

    std::string display_label() const;
    /// Throws std::invalid_argument on the first violated constraint.
    void validate() const;
};

/// Parses the text form over the defaults. Unknown keys, malformed values
/// and duplicate keys are errors; `origin` prefixes error messages.
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Complete text form; parse_config(to_text(c)) reproduces c exactly.
std::string to_text(const RunConfig& config);

/// Sets one key from its text value (the same rules as a config line).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace ergochron
