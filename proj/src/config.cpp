#include "ergochron/config.hpp"

#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ergochron/csv.hpp"

namespace ergochron {

RunConfig::RunConfig()
{
    protocol.energy_per_site = 100.0;
}

std::string RunConfig::display_label() const
{
    return label.empty() ? lattice.label() : label;
}

void RunConfig::validate() const
{
    lattice.validate();
    protocol.validate();
    if (!std::isfinite(params.J) || !std::isfinite(params.beta))
        throw std::invalid_argument("model: J and beta must be finite");
    if (ensemble_size < 1)
        throw std::invalid_argument("ensemble.size must be >= 1");
    if (workers < 0)
        throw std::invalid_argument("run.workers must be >= 0");
    if (lyapunov.enabled) {
        const auto& l = lyapunov;
        if (!(l.T > 0.0) || !(l.dt > 0.0) || !(l.dt_r > 0.0))
            throw std::invalid_argument("lyapunov: T, dt and dt_r must be > 0");
        if (l.chains < 1)
            throw std::invalid_argument("lyapunov.chains must be >= 1");
        if (l.max_lag < 12)
            throw std::invalid_argument("lyapunov.max_lag must be >= 12");
        if (l.burn_in && *l.burn_in < 0.0)
            throw std::invalid_argument("lyapunov.burn_in must be >= 0 or auto");
        step_count(l.dt_r, l.dt);
        const long long per_chain = step_count(l.T / l.chains, l.dt_r);
        // Ten batches per chain, each longer than the lag window.
        if (per_chain / 10 <= l.max_lag + 1)
            throw std::invalid_argument("lyapunov: T / chains too short for max_lag " +
                                        std::to_string(l.max_lag));
    }
    if (!(fit.rise > 0.0) || !(fit.margin >= 0.0))
        throw std::invalid_argument("fit: rise must be > 0 and margin >= 0");
    if (fit.bootstrap < 0)
        throw std::invalid_argument("fit.bootstrap must be >= 0");
    if (!(verdict.plateau_tolerance > 0.0) || !(verdict.drift_limit > 0.0))
        throw std::invalid_argument("verdict: tolerances must be > 0");
    // '#' starts a comment in the text form, so it could not round-trip.
    if (label.find_first_of(",#\n\r") != std::string::npos)
        throw std::invalid_argument("run.label must not contain commas, '#' or line breaks");
    if (out.string().find_first_of("#\n\r") != std::string::npos)
        throw std::invalid_argument("run.out must not contain '#' or line breaks");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double as_double(const std::string& v)
{
    return csv::parse_double(v);
}

long long as_integer(const std::string& v)
{
    return csv::parse_integer(v);
}

int as_int(const std::string& v)
{
    const long long x = as_integer(v);
    if (x < INT_MIN || x > INT_MAX)
        throw std::invalid_argument("integer out of range: " + v);
    return static_cast<int>(x);
}

std::uint64_t as_u64(const std::string& v)
{
    std::uint64_t x = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || end != v.data() + v.size())
        throw std::invalid_argument("not an unsigned 64-bit integer: '" + v + "'");
    return x;
}

bool as_bool(const std::string& v)
{
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::string from_bool(bool b)
{
    return b ? "true" : "false";
}

std::vector<int> as_extents(const std::string& v)
{
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(as_int(trim(item)));
    if (out.empty())
        throw std::invalid_argument("empty extents");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
    const char* name;
    Setter set;
    Getter get;
};

const std::vector<Key>& keys()
{
    using csv::format_double;
    static const std::vector<Key> table = {
        {"run.label", [](RunConfig& c, const std::string& v) { c.label = v; },
         [](const RunConfig& c) { return c.label; }},
        {"run.out", [](RunConfig& c, const std::string& v) { c.out = v; },
         [](const RunConfig& c) { return c.out.string(); }},
        {"run.workers", [](RunConfig& c, const std::string& v) { c.workers = as_int(v); },
         [](const RunConfig& c) { return std::to_string(c.workers); }},
        {"lattice.extents",
         [](RunConfig& c, const std::string& v) { c.lattice.extents = as_extents(v); },
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.lattice.extents.size(); ++i)
                 s += (i ? "," : "") + std::to_string(c.lattice.extents[i]);
             return s;
         }},
        {"lattice.boundary",
         [](RunConfig& c, const std::string& v) { c.lattice.boundary = boundary_from_string(v); },
         [](const RunConfig& c) { return to_string(c.lattice.boundary); }},
        {"model.J", [](RunConfig& c, const std::string& v) { c.params.J = as_double(v); },
         [](const RunConfig& c) { return format_double(c.params.J); }},
        {"model.beta", [](RunConfig& c, const std::string& v) { c.params.beta = as_double(v); },
         [](const RunConfig& c) { return format_double(c.params.beta); }},
        {"echo.tau", [](RunConfig& c, const std::string& v) { c.protocol.tau = as_double(v); },
         [](const RunConfig& c) { return format_double(c.protocol.tau); }},
        {"echo.dt", [](RunConfig& c, const std::string& v) { c.protocol.dt = as_double(v); },
         [](const RunConfig& c) { return format_double(c.protocol.dt); }},
        {"echo.sample_every",
         [](RunConfig& c, const std::string& v) { c.protocol.sample_every = as_int(v); },
         [](const RunConfig& c) { return std::to_string(c.protocol.sample_every); }},
        {"echo.epsilon",
         [](RunConfig& c, const std::string& v) { c.protocol.epsilon = as_double(v); },
         [](const RunConfig& c) { return format_double(c.protocol.epsilon); }},
        {"echo.n0", [](RunConfig& c, const std::string& v) { c.protocol.n0 = as_double(v); },
         [](const RunConfig& c) { return format_double(c.protocol.n0); }},
        {"echo.energy_per_site",
         [](RunConfig& c, const std::string& v) {
             if (v == "free")
                 c.protocol.energy_per_site.reset();
             else
                 c.protocol.energy_per_site = as_double(v);
         },
         [](const RunConfig& c) {
             return c.protocol.energy_per_site ? format_double(*c.protocol.energy_per_site)
                                               : std::string("free");
         }},
        {"ensemble.size", [](RunConfig& c, const std::string& v) { c.ensemble_size = as_integer(v); },
         [](const RunConfig& c) { return std::to_string(c.ensemble_size); }},
        {"ensemble.master_seed",
         [](RunConfig& c, const std::string& v) { c.master_seed = as_u64(v); },
         [](const RunConfig& c) { return std::to_string(c.master_seed); }},
        {"lyapunov.enabled",
         [](RunConfig& c, const std::string& v) { c.lyapunov.enabled = as_bool(v); },
         [](const RunConfig& c) { return from_bool(c.lyapunov.enabled); }},
        {"lyapunov.T", [](RunConfig& c, const std::string& v) { c.lyapunov.T = as_double(v); },
         [](const RunConfig& c) { return format_double(c.lyapunov.T); }},
        {"lyapunov.dt", [](RunConfig& c, const std::string& v) { c.lyapunov.dt = as_double(v); },
         [](const RunConfig& c) { return format_double(c.lyapunov.dt); }},
        {"lyapunov.dt_r",
         [](RunConfig& c, const std::string& v) { c.lyapunov.dt_r = as_double(v); },
         [](const RunConfig& c) { return format_double(c.lyapunov.dt_r); }},
        {"lyapunov.burn_in",
         [](RunConfig& c, const std::string& v) {
             if (v == "auto")
                 c.lyapunov.burn_in.reset();
             else
                 c.lyapunov.burn_in = as_double(v);
         },
         [](const RunConfig& c) {
             return c.lyapunov.burn_in ? format_double(*c.lyapunov.burn_in) : std::string("auto");
         }},
        {"lyapunov.chains",
         [](RunConfig& c, const std::string& v) { c.lyapunov.chains = as_int(v); },
         [](const RunConfig& c) { return std::to_string(c.lyapunov.chains); }},
        {"lyapunov.max_lag",
         [](RunConfig& c, const std::string& v) { c.lyapunov.max_lag = as_int(v); },
         [](const RunConfig& c) { return std::to_string(c.lyapunov.max_lag); }},
        {"fit.rise", [](RunConfig& c, const std::string& v) { c.fit.rise = as_double(v); },
         [](const RunConfig& c) { return format_double(c.fit.rise); }},
        {"fit.margin", [](RunConfig& c, const std::string& v) { c.fit.margin = as_double(v); },
         [](const RunConfig& c) { return format_double(c.fit.margin); }},
        {"fit.top_decile_cut",
         [](RunConfig& c, const std::string& v) { c.fit.top_decile_cut = as_bool(v); },
         [](const RunConfig& c) { return from_bool(c.fit.top_decile_cut); }},
        {"fit.bootstrap", [](RunConfig& c, const std::string& v) { c.fit.bootstrap = as_int(v); },
         [](const RunConfig& c) { return std::to_string(c.fit.bootstrap); }},
        {"verdict.plateau_tolerance",
         [](RunConfig& c, const std::string& v) { c.verdict.plateau_tolerance = as_double(v); },
         [](const RunConfig& c) { return format_double(c.verdict.plateau_tolerance); }},
        {"verdict.drift_limit",
         [](RunConfig& c, const std::string& v) { c.verdict.drift_limit = as_double(v); },
         [](const RunConfig& c) { return format_double(c.verdict.drift_limit); }},
    };
    return table;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value)
{
    for (const auto& k : keys()) {
        if (key == k.name) {
            try {
                k.set(config, value);
            } catch (const std::exception& e) {
                throw std::invalid_argument(key + ": " + e.what());
            }
            return;
        }
    }
    throw std::invalid_argument("unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& in, const std::string& origin)
{
    RunConfig c;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto where = origin + ":" + std::to_string(lineno) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
            throw std::invalid_argument(where + "duplicate key '" + key + "'");
        try {
            apply_setting(c, key, value);
        } catch (const std::exception& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file " + path.string());
    return parse_config(in, path.string());
}

std::string to_text(const RunConfig& config)
{
    std::string out;
    for (const auto& k : keys())
        out += std::string(k.name) + " = " + k.get(config) + "\n";
    return out;
}

}  // namespace ergochron
