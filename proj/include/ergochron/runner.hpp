#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergochron/analysis.hpp"
#include "ergochron/config.hpp"
#include "ergochron/echo.hpp"
#include "ergochron/lyapunov.hpp"

namespace ergochron {

/// Worker count: `requested` if positive, else $ERGOCHRON_WORKERS, else the
/// hardware concurrency (at least 1).
int resolve_workers(int requested);

/// Runs body(i) for i in [0, count) on `workers` threads pulling indices from
/// a shared counter. The first exception (lowest index) is rethrown after all
/// threads stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

/// Seed of echo realization i (derive_seed(master, i)).
std::uint64_t echo_seed(std::uint64_t master, long long index);
/// Seed of direct-pipeline chain c, from a stream disjoint from echo seeds.
std::uint64_t chain_seed(std::uint64_t master, int chain);
/// Seed of the slope bootstrap.
std::uint64_t bootstrap_seed(std::uint64_t master);

/// Thrown when a realization fails; carries its index and seed.
class RealizationError : public std::runtime_error {
  public:
    RealizationError(long long index, std::uint64_t seed, const std::string& what);
    long long index;
    std::uint64_t seed;
};

/// M echo realizations in index order, independent of the worker count.
std::vector<EchoRecord> run_echo_ensemble(const PreparedLattice& lattice, const RunConfig& config,
                                          int workers);

struct DirectResult {
    std::vector<std::uint64_t> seeds;
    std::vector<StretchSeries> chains;
    LyapunovSummary summary;
};

/// Direct pipeline: `chains` tangent-dynamics chains of T / chains each.
DirectResult run_direct(const PreparedLattice& lattice, const RunConfig& config, int workers);

/// Fits, variance ratio and (when the direct summary is available) the
/// summary row of one lattice.
struct Analysis {
    EnsembleStats stats;
    FitResult fit_g;
    FitResult fit_w;
    VarianceRatio ratio;
    std::optional<ErgodizationReport> report;
};

Analysis analyze(const std::vector<EchoRecord>& records, const RunConfig& config,
                 const std::optional<LyapunovSummary>& direct);

// CSV encoders and decoders of the on-disk schemas.
std::string echo_series_csv(const std::vector<EchoRecord>& records);
std::vector<EchoRecord> read_echo_series(const std::filesystem::path& path);
std::string gw_curves_csv(const EnsembleStats& stats);
std::string phi_csv(const PhiGrid& phi);
PhiGrid read_phi(const std::filesystem::path& path);
std::string stretch_summary_header();
std::string stretch_summary_row(const std::string& label, const RunConfig& config,
                                const DirectResult& direct);
std::string fits_header();
std::string fits_rows(const std::string& label, const Analysis& analysis);
std::string summary_header();
std::string summary_row(const ErgodizationReport& report);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Artifact {
    std::string name;  ///< path relative to the run directory
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RealizationInfo {
    long long index = 0;
    std::uint64_t seed = 0;
    double energy = 0.0;
};

struct RunManifest {
    std::string config_text;
    std::vector<RealizationInfo> realizations;
    std::vector<std::uint64_t> chain_seeds;
    std::string started_utc;
    double wall_seconds = 0.0;
    int workers = 1;
    std::vector<Artifact> artifacts;

    std::string to_text() const;
};

/// Hashes the named files of `dir` into artifact entries.
std::vector<Artifact> collect_artifacts(const std::filesystem::path& dir,
                                        const std::vector<std::string>& names);

/// Echo ensemble (and the direct pipeline when enabled) for one lattice;
/// writes run.cfg, echo_series.csv, gw_curves.csv, fits.csv, phi.csv,
/// stretch_summary.csv, summary.csv and manifest.txt into config.out.
RunManifest run_ensemble(const RunConfig& config);

/// Direct pipeline only: run.cfg, phi.csv, stretch_summary.csv, manifest.txt.
RunManifest run_lyapunov(const RunConfig& config);

/// Recomputes gw_curves.csv, fits.csv and (if phi.csv and
/// stretch_summary.csv exist) summary.csv from the stored files of a run
/// directory. Returns the names of the files written.
std::vector<std::string> analyze_directory(const std::filesystem::path& dir);

enum class Target { table1, fig2, fig3, fig4 };
Target target_from_string(const std::string& s);

/// Preset configuration of one reference lattice ("1D", "2D" or "3D").
RunConfig preset(const std::string& name);

/// Lattices of the size sweep behind the variance-versus-size plot.
std::vector<LatticeSpec> size_sweep();

struct ReproduceOptions {
    std::uint64_t seed = 7;
    int workers = 0;
    std::filesystem::path out = "out";
    /// Applied to every preset config after the defaults (e.g. ensemble.size).
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// One-command targets. Each lattice runs in its own subdirectory; the
/// combined tables land in `out`.
void reproduce(Target target, const ReproduceOptions& options);

}  // namespace ergochron
