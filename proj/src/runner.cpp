#include "ergochron/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "ergochron/csv.hpp"
#include "ergochron/seed.hpp"

namespace ergochron {

namespace fs = std::filesystem;
using csv::format_double;

int resolve_workers(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("ERGOCHRON_WORKERS"); env && *env) {
        long long v = 0;
        try {
            v = csv::parse_integer(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("ERGOCHRON_WORKERS must be a positive integer, got '" +
                                        std::string(env) + "'");
        }
        if (v < 1)
            throw std::invalid_argument("ERGOCHRON_WORKERS must be a positive integer");
        return static_cast<int>(std::min<long long>(v, 1024));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body)
{
    const auto n_threads = static_cast<std::size_t>(
        std::clamp<long long>(workers, 1, static_cast<long long>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::size_t first_index = count;

    auto work = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
                stop = true;
            }
        }
    };

    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

std::uint64_t echo_seed(std::uint64_t master, long long index)
{
    return derive_seed(master, static_cast<std::uint64_t>(index));
}

std::uint64_t chain_seed(std::uint64_t master, int chain)
{
    return derive_seed(master ^ 0x243f6a8885a308d3ull, static_cast<std::uint64_t>(chain));
}

std::uint64_t bootstrap_seed(std::uint64_t master)
{
    return derive_seed(master ^ 0x13198a2e03707344ull, 0);
}

RealizationError::RealizationError(long long i, std::uint64_t s, const std::string& what)
    : std::runtime_error("realization " + std::to_string(i) + " (seed " + std::to_string(s) +
                         ") failed: " + what),
      index(i),
      seed(s)
{
}

std::vector<EchoRecord> run_echo_ensemble(const PreparedLattice& lattice, const RunConfig& config,
                                          int workers)
{
    const auto m = static_cast<std::size_t>(config.ensemble_size);
    std::vector<EchoRecord> records(m);
    parallel_for(m, workers, [&](std::size_t i) {
        EchoProtocol p = config.protocol;
        p.seed = echo_seed(config.master_seed, static_cast<long long>(i));
        try {
            records[i] = run_echo(lattice, config.params, p);
        } catch (const std::exception& e) {
            throw RealizationError(static_cast<long long>(i), p.seed, e.what());
        }
        for (double v : records[i].log_deviation)
            if (!std::isfinite(v))
                throw RealizationError(static_cast<long long>(i), p.seed,
                                       "non-finite log deviation");
    });
    return records;
}

DirectResult run_direct(const PreparedLattice& lattice, const RunConfig& config, int workers)
{
    const auto& l = config.lyapunov;
    DirectResult out;
    out.chains.resize(static_cast<std::size_t>(l.chains));
    for (int c = 0; c < l.chains; ++c)
        out.seeds.push_back(chain_seed(config.master_seed, c));
    parallel_for(out.chains.size(), workers, [&](std::size_t c) {
        StretchSettings s;
        s.T = l.T / l.chains;
        s.dt = l.dt;
        s.dt_r = l.dt_r;
        s.burn_in = l.burn_in ? *l.burn_in : -1.0;
        s.n0 = config.protocol.n0;
        s.energy_per_site = config.protocol.energy_per_site;
        s.seed = out.seeds[c];
        try {
            out.chains[c] = stretching_rates(lattice, config.params, s);
        } catch (const std::exception& e) {
            throw RealizationError(static_cast<long long>(c), s.seed,
                                   std::string("lyapunov chain: ") + e.what());
        }
    });
    out.summary = summarize(out.chains, l.max_lag);
    return out;
}

Analysis analyze(const std::vector<EchoRecord>& records, const RunConfig& config,
                 const std::optional<LyapunovSummary>& direct)
{
    Analysis a;
    a.stats = aggregate(records);
    WindowPolicy policy;
    policy.rise = config.fit.rise;
    policy.margin = config.fit.margin;
    policy.top_decile_cut = config.fit.top_decile_cut;
    a.fit_g = fit_growth(a.stats, Curve::G, policy);
    a.fit_w = fit_growth(a.stats, Curve::W, policy);
    if (config.fit.bootstrap >= 2) {
        const auto seed = bootstrap_seed(config.master_seed);
        a.fit_g.slope_error = bootstrap_slope_error(records, Curve::G, a.fit_g.t_lo, a.fit_g.t_hi,
                                                    config.fit.bootstrap, seed);
        a.fit_w.slope_error = bootstrap_slope_error(records, Curve::W, a.fit_w.t_lo, a.fit_w.t_hi,
                                                    config.fit.bootstrap, seed);
    }
    a.ratio = variance_ratio_curve(a.stats, a.fit_g.t_lo, a.fit_g.t_hi,
                                   a.fit_w.slope - a.fit_g.slope, config.verdict);
    if (direct) {
        const PreparedLattice geometry(config.lattice);
        a.report = build_report(config.display_label(), geometry.site_count(),
                                geometry.table.coordination(), a.stats, a.fit_g, a.fit_w, *direct,
                                config.verdict);
    }
    return a;
}

// ---------------------------------------------------------------------------
// CSV schemas

std::string echo_series_csv(const std::vector<EchoRecord>& records)
{
    std::string out = "realization_id,dt,log_deviation\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string id = std::to_string(i);
        for (std::size_t k = 0; k < r.dt_grid.size(); ++k)
            out += csv::row({id, format_double(r.dt_grid[k]), format_double(r.log_deviation[k])});
    }
    return out;
}

std::vector<EchoRecord> read_echo_series(const fs::path& path)
{
    const auto t = csv::read(path);
    const auto c_id = t.column("realization_id");
    const auto c_dt = t.column("dt");
    const auto c_ld = t.column("log_deviation");
    std::vector<EchoRecord> records;
    for (std::size_t row = 0; row < t.rows.size(); ++row) {
        const auto& f = t.rows[row];
        const long long id = csv::parse_integer(f[c_id]);
        if (id < 0 || static_cast<std::size_t>(id) > records.size())
            throw std::runtime_error(path.string() + ": realization ids must be contiguous from 0");
        if (static_cast<std::size_t>(id) == records.size())
            records.emplace_back();
        auto& r = records[static_cast<std::size_t>(id)];
        r.dt_grid.push_back(csv::parse_double(f[c_dt]));
        r.log_deviation.push_back(csv::parse_double(f[c_ld]));
    }
    if (records.empty())
        throw std::runtime_error(path.string() + ": no rows");
    return records;
}

std::string gw_curves_csv(const EnsembleStats& s)
{
    std::string out =
        "dt,count,G,G_error,W,W_error,sigma_G2,sigma_G2_error,variance_ratio,upper_decile\n";
    for (std::size_t k = 0; k < s.size(); ++k)
        out += csv::row({format_double(s.dt_grid[k]), std::to_string(s.count[k]),
                         format_double(s.G[k]), format_double(s.G_error[k]),
                         format_double(s.W[k]), format_double(s.W_error[k]),
                         format_double(s.sigma_G2[k]), format_double(s.sigma_G2_error[k]),
                         format_double(s.sigma_G2[k] / (2.0 * s.dt_grid[k])),
                         format_double(s.upper_decile[k])});
    return out;
}

std::string phi_csv(const PhiGrid& phi)
{
    std::string out = "lag,phi,stderr\n";
    for (std::size_t k = 0; k < phi.phi.size(); ++k)
        out += csv::row({format_double(static_cast<double>(k) * phi.dt_r), format_double(phi.phi[k]),
                         format_double(k < phi.error.size() ? phi.error[k] : 0.0)});
    return out;
}

PhiGrid read_phi(const fs::path& path)
{
    const auto t = csv::read(path);
    const auto c_lag = t.column("lag");
    const auto c_phi = t.column("phi");
    const auto c_err = t.column("stderr");
    PhiGrid g;
    for (const auto& f : t.rows) {
        g.phi.push_back(csv::parse_double(f[c_phi]));
        g.error.push_back(csv::parse_double(f[c_err]));
    }
    if (t.rows.size() < 2)
        throw std::runtime_error(path.string() + ": need at least two lags");
    g.dt_r = csv::parse_double(t.rows[1][c_lag]) - csv::parse_double(t.rows[0][c_lag]);
    return g;
}

namespace {

std::string extents_text(const LatticeSpec& spec)
{
    std::string s;
    for (std::size_t i = 0; i < spec.extents.size(); ++i)
        s += (i ? "x" : "") + std::to_string(spec.extents[i]);
    return s;
}

std::string estimate_fields(const Estimate& e)
{
    return format_double(e.value) + "," + format_double(e.error);
}

}  // namespace

std::string stretch_summary_header()
{
    return "lattice,extents,N,N_nn,T,dt_r,chains,samples,burn_in,lambda_max,lambda_max_error,"
           "var_dlambda,var_dlambda_error,tau_eq4,tau_eq4_error,phi_integral,first_moment,"
           "cutoff_lag,noise_floor\n";
}

std::string stretch_summary_row(const std::string& label, const RunConfig& config,
                                const DirectResult& direct)
{
    const PreparedLattice geometry(config.lattice);
    const auto& s = direct.summary;
    const long long burn = direct.chains.empty() ? 0 : direct.chains.front().burn_in_dropped;
    return csv::row({label, extents_text(config.lattice), std::to_string(geometry.site_count()),
                     std::to_string(geometry.table.coordination()),
                     format_double(config.lyapunov.T), format_double(config.lyapunov.dt_r),
                     std::to_string(config.lyapunov.chains), std::to_string(s.samples),
                     format_double(static_cast<double>(burn) * config.lyapunov.dt_r),
                     estimate_fields(s.lambda_max), estimate_fields(s.var_dlambda),
                     estimate_fields(s.tau_erg_eq4), format_double(s.integral.integral),
                     format_double(s.integral.first_moment), std::to_string(s.integral.cutoff_lag),
                     format_double(s.integral.noise_floor)});
}

std::string fits_header()
{
    return "lattice,curve,slope,slope_error,intercept,t_lo,t_hi,points,residual_rms,"
           "ratio_plateau,ratio_expected,ratio_drift,ratio_monotone,verdict\n";
}

std::string fits_rows(const std::string& label, const Analysis& a)
{
    std::string out;
    const auto& vr = a.ratio;
    for (const auto* f : {&a.fit_g, &a.fit_w}) {
        const std::string curve = f == &a.fit_g ? "G" : "W";
        out += csv::row({label, curve, format_double(f->slope), format_double(f->slope_error),
                         format_double(f->intercept), format_double(f->t_lo),
                         format_double(f->t_hi), std::to_string(f->points),
                         format_double(f->residual_rms), format_double(vr.plateau),
                         format_double(vr.expected), format_double(vr.drift),
                         vr.monotone ? "true" : "false", to_string(vr.verdict)});
    }
    return out;
}

std::string summary_header()
{
    return "lattice,N,N_nn,lambda_max,lambda_max_error,lambda_G,lambda_G_error,Lambda,Lambda_error,"
           "var_direct,var_direct_error,var_eq10,tau_eq4,tau_eq4_error,tau_eq9,tau_eq9_error,"
           "tau_eq11,plateau,plateau_expected,verdict\n";
}

std::string summary_row(const ErgodizationReport& r)
{
    return csv::row({r.label, std::to_string(r.sites), std::to_string(r.n_nn),
                     estimate_fields(r.lambda_max_direct), estimate_fields(r.lambda_max_echo),
                     estimate_fields(r.Lambda), estimate_fields(r.var_dlambda_direct),
                     format_double(r.var_dlambda_empirical), estimate_fields(r.tau_erg_eq4),
                     estimate_fields(r.tau_erg_eq9), format_double(r.tau_erg_eq11),
                     format_double(r.plateau_level), format_double(r.plateau_expected),
                     to_string(r.verdict)});
}

// ---------------------------------------------------------------------------
// Manifest

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: init failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::vector<Artifact> collect_artifacts(const fs::path& dir, const std::vector<std::string>& names)
{
    std::vector<Artifact> out;
    for (const auto& n : names)
        out.push_back({n, fs::file_size(dir / n), sha256_file(dir / n)});
    return out;
}

std::string RunManifest::to_text() const
{
    std::string out;
    out += "started_utc = " + started_utc + "\n";
    out += "wall_seconds = " + format_double(wall_seconds) + "\n";
    out += "workers = " + std::to_string(workers) + "\n";
    out += "\n[config]\n" + config_text;
    if (!realizations.empty()) {
        out += "\n[realizations]\nindex,seed,energy\n";
        for (const auto& r : realizations)
            out += csv::row({std::to_string(r.index), std::to_string(r.seed),
                             format_double(r.energy)});
    }
    if (!chain_seeds.empty()) {
        out += "\n[chains]\nchain,seed\n";
        for (std::size_t c = 0; c < chain_seeds.size(); ++c)
            out += csv::row({std::to_string(c), std::to_string(chain_seeds[c])});
    }
    out += "\n[artifacts]\nname,bytes,sha256\n";
    for (const auto& a : artifacts)
        out += csv::row({a.name, std::to_string(a.bytes), a.sha256});
    return out;
}

namespace {

std::string utc_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Stopwatch {
  public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void prepare_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory " + dir.string());
}

void write_direct_files(const fs::path& dir, const RunConfig& config, const DirectResult& direct)
{
    csv::write_file(dir / "phi.csv", phi_csv(direct.summary.phi));
    csv::write_file(dir / "stretch_summary.csv",
                    stretch_summary_header() +
                        stretch_summary_row(config.display_label(), config, direct));
}

void write_analysis_files(const fs::path& dir, const RunConfig& config, const Analysis& a,
                          std::vector<std::string>& written)
{
    csv::write_file(dir / "gw_curves.csv", gw_curves_csv(a.stats));
    csv::write_file(dir / "fits.csv", fits_header() + fits_rows(config.display_label(), a));
    written.insert(written.end(), {"gw_curves.csv", "fits.csv"});
    if (a.report) {
        csv::write_file(dir / "summary.csv", summary_header() + summary_row(*a.report));
        written.push_back("summary.csv");
    }
}

// Reads the first data row of stretch_summary.csv back into a summary.
LyapunovSummary read_direct(const fs::path& dir)
{
    LyapunovSummary s;
    s.phi = read_phi(dir / "phi.csv");
    const auto t = csv::read(dir / "stretch_summary.csv");
    if (t.rows.empty())
        throw std::runtime_error((dir / "stretch_summary.csv").string() + ": no rows");
    const auto& f = t.rows.front();
    auto num = [&](const char* name) { return csv::parse_double(f[t.column(name)]); };
    s.lambda_max = {num("lambda_max"), num("lambda_max_error")};
    s.var_dlambda = {num("var_dlambda"), num("var_dlambda_error")};
    s.tau_erg_eq4 = {num("tau_eq4"), num("tau_eq4_error")};
    s.samples = static_cast<std::size_t>(num("samples"));
    s.integral = tau_erg_eq4(s.phi);
    s.integral.error = s.tau_erg_eq4.error;
    return s;
}

}  // namespace

RunManifest run_ensemble(const RunConfig& config)
{
    config.validate();
    const Stopwatch clock;
    RunManifest manifest;
    manifest.started_utc = utc_now();
    manifest.workers = resolve_workers(config.workers);
    manifest.config_text = to_text(config);
    const fs::path dir = config.out;
    prepare_directory(dir);

    const PreparedLattice lattice(config.lattice);
    const auto records = run_echo_ensemble(lattice, config, manifest.workers);
    for (std::size_t i = 0; i < records.size(); ++i)
        manifest.realizations.push_back(
            {static_cast<long long>(i), records[i].seed, records[i].realized_energy});

    std::vector<std::string> written{"run.cfg", "echo_series.csv"};
    csv::write_file(dir / "run.cfg", manifest.config_text);
    csv::write_file(dir / "echo_series.csv", echo_series_csv(records));

    std::optional<LyapunovSummary> summary;
    if (config.lyapunov.enabled) {
        const DirectResult direct = run_direct(lattice, config, manifest.workers);
        manifest.chain_seeds = direct.seeds;
        write_direct_files(dir, config, direct);
        written.insert(written.end(), {"phi.csv", "stretch_summary.csv"});
        summary = direct.summary;
    }
    write_analysis_files(dir, config, analyze(records, config, summary), written);

    manifest.artifacts = collect_artifacts(dir, written);
    manifest.wall_seconds = clock.seconds();
    csv::write_file(dir / "manifest.txt", manifest.to_text());
    return manifest;
}

RunManifest run_lyapunov(const RunConfig& config)
{
    RunConfig c = config;
    c.lyapunov.enabled = true;
    c.validate();
    const Stopwatch clock;
    RunManifest manifest;
    manifest.started_utc = utc_now();
    manifest.workers = resolve_workers(c.workers);
    manifest.config_text = to_text(c);
    const fs::path dir = c.out;
    prepare_directory(dir);

    const PreparedLattice lattice(c.lattice);
    const DirectResult direct = run_direct(lattice, c, manifest.workers);
    manifest.chain_seeds = direct.seeds;
    csv::write_file(dir / "run.cfg", manifest.config_text);
    write_direct_files(dir, c, direct);
    manifest.artifacts = collect_artifacts(dir, {"run.cfg", "phi.csv", "stretch_summary.csv"});
    manifest.wall_seconds = clock.seconds();
    csv::write_file(dir / "manifest.txt", manifest.to_text());
    return manifest;
}

std::vector<std::string> analyze_directory(const fs::path& dir)
{
    const RunConfig config = load_config(dir / "run.cfg");
    const auto records = read_echo_series(dir / "echo_series.csv");
    std::optional<LyapunovSummary> direct;
    if (fs::exists(dir / "phi.csv") && fs::exists(dir / "stretch_summary.csv"))
        direct = read_direct(dir);
    std::vector<std::string> written;
    write_analysis_files(dir, config, analyze(records, config, direct), written);
    return written;
}

// ---------------------------------------------------------------------------
// Presets

Target target_from_string(const std::string& s)
{
    if (s == "table1")
        return Target::table1;
    if (s == "fig2")
        return Target::fig2;
    if (s == "fig3")
        return Target::fig3;
    if (s == "fig4")
        return Target::fig4;
    throw std::invalid_argument("unknown reproduce target '" + s +
                                "' (expected table1, fig2, fig3 or fig4)");
}

RunConfig preset(const std::string& name)
{
    RunConfig c;
    c.label = name;
    if (name == "1D")
        c.lattice = {{100}, Boundary::periodic};
    else if (name == "2D")
        c.lattice = {{10, 10}, Boundary::periodic};
    else if (name == "3D")
        c.lattice = {{4, 4, 4}, Boundary::periodic};
    else
        throw std::invalid_argument("unknown preset '" + name + "' (expected 1D, 2D or 3D)");
    return c;
}

std::vector<LatticeSpec> size_sweep()
{
    return {
        {{25}, Boundary::periodic},     {{50}, Boundary::periodic},
        {{100}, Boundary::periodic},    {{200}, Boundary::periodic},
        {{5, 5}, Boundary::periodic},   {{7, 7}, Boundary::periodic},
        {{10, 10}, Boundary::periodic}, {{3, 3, 3}, Boundary::periodic},
        {{4, 4, 4}, Boundary::periodic},
    };
}

namespace {

std::string directory_name(const LatticeSpec& spec)
{
    return std::to_string(spec.dims()) + "D_" + extents_text(spec);
}

void write_top_manifest(const fs::path& out, const std::string& header,
                        const std::vector<std::string>& names)
{
    RunManifest m;
    m.started_utc = utc_now();
    m.config_text = header;
    m.artifacts = collect_artifacts(out, names);
    csv::write_file(out / "manifest.txt", m.to_text());
}

}  // namespace

void reproduce(Target target, const ReproduceOptions& options)
{
    prepare_directory(options.out);
    const std::string seed_line = "seed = " + std::to_string(options.seed) + "\n";

    if (target == Target::fig3) {
        std::string table = stretch_summary_header();
        std::vector<std::string> names;
        const auto lattices = size_sweep();
        for (std::size_t i = 0; i < lattices.size(); ++i) {
            RunConfig c;
            c.lattice = lattices[i];
            c.label = lattices[i].label();
            c.master_seed = derive_seed(options.seed, i);
            c.workers = options.workers;
            for (const auto& [k, v] : options.overrides)
                apply_setting(c, k, v);
            const std::string sub = directory_name(c.lattice);
            c.out = options.out / sub;
            run_lyapunov(c);
            const auto rows = csv::read(c.out / "stretch_summary.csv");
            table += csv::row(rows.rows.front());
            names.push_back(sub + "/manifest.txt");
        }
        csv::write_file(options.out / "stretch_summary.csv", table);
        names.insert(names.begin(), "stretch_summary.csv");
        write_top_manifest(options.out, "target = fig3\n" + seed_line, names);
        return;
    }

    const bool with_direct = target == Target::table1;
    std::string summary = summary_header();
    std::string fits = fits_header();
    std::vector<std::string> names;
    const std::vector<std::string> lattices{"1D", "2D", "3D"};
    for (std::size_t i = 0; i < lattices.size(); ++i) {
        RunConfig c = preset(lattices[i]);
        c.master_seed = derive_seed(options.seed, i);
        c.workers = options.workers;
        c.lyapunov.enabled = with_direct;
        for (const auto& [k, v] : options.overrides)
            apply_setting(c, k, v);
        c.out = options.out / lattices[i];
        run_ensemble(c);
        if (with_direct)
            summary += csv::row(csv::read(c.out / "summary.csv").rows.front());
        for (const auto& r : csv::read(c.out / "fits.csv").rows)
            fits += csv::row(r);
        names.push_back(lattices[i] + "/manifest.txt");
    }
    std::vector<std::string> top{"fits.csv"};
    csv::write_file(options.out / "fits.csv", fits);
    if (with_direct) {
        csv::write_file(options.out / "summary.csv", summary);
        top.push_back("summary.csv");
    }
    names.insert(names.begin(), top.begin(), top.end());
    const char* name = target == Target::table1 ? "table1" : target == Target::fig2 ? "fig2" : "fig4";
    write_top_manifest(options.out, std::string("target = ") + name + "\n" + seed_line, names);
}

}  // namespace ergochron
