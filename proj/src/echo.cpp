#include "ergochron/echo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ergochron {

long long EchoProtocol::samples_per_leg() const
{
    try {
        return step_count(tau, sample_interval());
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("echo: tau " + std::to_string(tau) +
                                    " is not a multiple of the sample interval " +
                                    std::to_string(sample_interval()) +
                                    "; forward and reversed sample grids would misalign");
    }
}

void EchoProtocol::validate() const
{
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("echo: epsilon must be >= 0");
    if (!(tau > 0.0))
        throw std::invalid_argument("echo: tau must be > 0");
    if (!(dt > 0.0))
        throw std::invalid_argument("echo: dt must be > 0");
    if (sample_every < 1)
        throw std::invalid_argument("echo: sample_every must be >= 1");
    if (!(n0 > 0.0))
        throw std::invalid_argument("echo: n0 must be > 0");
    if (samples_per_leg() < 1)
        throw std::invalid_argument("echo: tau shorter than one sample interval");
}

FieldState initial_state(const LatticeSpec& spec, double n0, Rng& rng)
{
    if (!(n0 > 0.0))
        throw std::invalid_argument("initial_state: n0 must be > 0");
    const auto n = static_cast<Eigen::Index>(spec.site_count());
    FieldState s;
    s.psi.resize(n);
    const double amplitude = std::sqrt(n0);
    for (Eigen::Index j = 0; j < n; ++j)
        s.psi[j] = std::polar(amplitude, 2.0 * std::numbers::pi * rng.uniform());
    return s;
}

FieldState shell_state(const PreparedLattice& lattice, const ModelParams& params, double n0,
                       double energy_per_site, Rng& rng)
{
    FieldState s = initial_state(lattice.spec, n0, rng);
    const auto n = static_cast<double>(lattice.site_count());
    const double target = energy_per_site * n;
    if (!std::isfinite(target))
        throw std::invalid_argument("shell_state: energy per site must be finite");

    // At fixed |psi_j|^2 = n0 only the hopping part can move.
    const double interaction = 0.5 * params.beta * n0 * n0 * n;
    double degree_sum = 0.0;
    for (std::size_t j = 0; j < lattice.site_count(); ++j)
        degree_sum += static_cast<double>(lattice.table.neighbors(j).size());
    const double hop_bound = std::abs(params.J) * n0 * degree_sum;
    if (!(std::abs(target - interaction) < hop_bound))
        throw std::invalid_argument("shell_state: E/N = " + std::to_string(energy_per_site) +
                                    " is unreachable with equal occupations " +
                                    std::to_string(n0));

    const double tol = 1e-9 * std::max(std::abs(target), n0 * n);
    const double amplitude = std::sqrt(n0);
    const auto sites = static_cast<Eigen::Index>(lattice.site_count());
    Eigen::VectorXd theta(sites);
    for (Eigen::Index j = 0; j < sites; ++j)
        theta[j] = std::arg(s.psi[j]);

    double gap = energy(s, params, lattice.table) - target;
    const long long budget = 100000LL * sites;
    for (long long it = 0; it < budget; ++it) {
        if (it % sites == 0) {
            gap = energy(s, params, lattice.table) - target;  // shed accumulated rounding
            if (std::abs(gap) <= tol)
                return s;
        }
        const auto j = std::min<Eigen::Index>(
            sites - 1, static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(sites)));
        const auto& nb = lattice.table.neighbors(static_cast<std::size_t>(j));
        Complex field = 0.0;
        for (int k : nb)
            field += s.psi[k];
        const double scale = 2.0 * std::abs(params.J) * amplitude * std::abs(field);
        const double width =
            scale > 0.0 ? std::numbers::pi * std::min(1.0, std::abs(gap) / scale) : std::numbers::pi;
        const double proposal = theta[j] + width * (2.0 * rng.uniform() - 1.0);
        const Complex next = std::polar(amplitude, proposal);
        // Ordered neighbour pairs count each bond twice.
        const double delta = -2.0 * params.J * (std::conj(next - s.psi[j]) * field).real();
        if (std::abs(gap + delta) < std::abs(gap)) {
            s.psi[j] = next;
            theta[j] = proposal;
            gap += delta;
        }
    }
    throw std::runtime_error("shell_state: phase walk did not reach E/N = " +
                             std::to_string(energy_per_site));
}

FieldState prepare_state(const PreparedLattice& lattice, const ModelParams& params, double n0,
                         const std::optional<double>& energy_per_site, Rng& rng)
{
    if (energy_per_site)
        return shell_state(lattice, params, n0, *energy_per_site, rng);
    return initial_state(lattice.spec, n0, rng);
}

FieldState perturb(const FieldState& state, double epsilon, Rng& rng)
{
    if (!(epsilon >= 0.0))
        throw std::invalid_argument("perturb: epsilon must be >= 0");
    if (epsilon == 0.0)
        return state;
    Amplitudes delta(state.psi.size());
    for (Eigen::Index j = 0; j < delta.size(); ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        delta[j] = Complex(re, im);
    }
    delta *= epsilon / delta.norm();
    FieldState out = state;
    out.psi += delta;
    return out;
}

EchoRecord run_echo(const PreparedLattice& lattice, const ModelParams& params,
                    const EchoProtocol& protocol)
{
    protocol.validate();
    const long long K = protocol.samples_per_leg();
    const std::size_t n_sites = lattice.site_count();
    const int every = protocol.sample_every;

    Rng rng(protocol.seed);
    FieldState state = prepare_state(lattice, params, protocol.n0, protocol.energy_per_site, rng);

    EchoRecord rec;
    rec.seed = protocol.seed;
    rec.realized_energy = energy(state, params, lattice.table);

    // Forward occupations n_i(k h), k = 0..K, one row per sample.
    std::vector<double> forward(static_cast<std::size_t>(K + 1) * n_sites);
    auto store = [&](long long k) {
        double* row = forward.data() + static_cast<std::size_t>(k) * n_sites;
        for (std::size_t j = 0; j < n_sites; ++j)
            row[j] = std::norm(state.psi[static_cast<Eigen::Index>(j)]);
    };

    const SplitStepper fwd(lattice.spectrum, params, protocol.dt);
    store(0);
    for (long long k = 1; k <= K; ++k) {
        fwd.advance(state, every);
        store(k);
    }

    state = perturb(state, protocol.epsilon, rng);
    const SplitStepper bwd(lattice.spectrum, reverse_params(params), protocol.dt);

    rec.dt_grid.resize(static_cast<std::size_t>(K));
    rec.log_deviation.resize(static_cast<std::size_t>(K));
    const double h = protocol.sample_interval();
    for (long long k = 1; k <= K; ++k) {
        bwd.advance(state, every);
        const double* mirror = forward.data() + static_cast<std::size_t>(K - k) * n_sites;
        double sum_sq = 0.0;
        for (std::size_t j = 0; j < n_sites; ++j) {
            const double dn = std::norm(state.psi[static_cast<Eigen::Index>(j)]) - mirror[j];
            sum_sq += dn * dn;
        }
        rec.dt_grid[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * h;
        rec.log_deviation[static_cast<std::size_t>(k - 1)] = 0.5 * std::log(sum_sq);
    }
    return rec;
}

EchoRecord run_echo(const LatticeSpec& spec, const ModelParams& params,
                    const EchoProtocol& protocol)
{
    return run_echo(PreparedLattice(spec), params, protocol);
}

}  // namespace ergochron
