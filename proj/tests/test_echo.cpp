#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ergochron/analysis.hpp"
#include "ergochron/echo.hpp"

using namespace ergochron;

namespace {

// Kolmogorov-Smirnov statistic of a sample against U(0, 1).
double ks_uniform(std::vector<double> x)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        d = std::max({d, (i + 1) / n - x[i], x[i] - i / n});
    return d;
}

// Asymptotic KS tail probability.
double ks_p_value(double d, double n)
{
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

std::vector<double> phases_of(const FieldState& s)
{
    std::vector<double> u;
    for (const auto& z : s.psi) {
        double a = std::arg(z) / (2.0 * std::numbers::pi);
        u.push_back(a < 0.0 ? a + 1.0 : a);
    }
    return u;
}

}  // namespace

TEST_CASE("initial_state: equal occupations, reproducible, uniform phases")
{
    const LatticeSpec spec{{100}, Boundary::periodic};
    Rng rng(1);
    const FieldState s = initial_state(spec, 100.0, rng);
    CHECK(particle_number(s) == doctest::Approx(1e4).epsilon(1e-14));
    for (const auto& z : s.psi)
        CHECK(std::norm(z) == doctest::Approx(100.0).epsilon(1e-14));

    Rng again(1);
    CHECK(initial_state(spec, 100.0, again).psi == s.psi);

    Rng big(2);
    const FieldState many = initial_state(LatticeSpec{{100, 100}, Boundary::periodic}, 100.0, big);
    const double d = ks_uniform(phases_of(many));
    CHECK(ks_p_value(d, 1e4) > 1e-3);

    CHECK_THROWS_AS(initial_state(spec, 0.0, rng), std::invalid_argument);
}

TEST_CASE("shell_state lands on the requested energy with equal occupations")
{
    const ModelParams p;
    for (const LatticeSpec& spec : {LatticeSpec{{100}, Boundary::periodic},
                                    LatticeSpec{{10, 10}, Boundary::periodic},
                                    LatticeSpec{{4, 4, 4}, Boundary::periodic}}) {
        const PreparedLattice lat(spec);
        Rng rng(derive_seed(3, spec.site_count()));
        const FieldState s = shell_state(lat, p, 100.0, 100.0, rng);
        const double n = static_cast<double>(spec.site_count());
        CHECK(energy(s, p, lat.table) == doctest::Approx(100.0 * n).epsilon(1e-9));
        for (const auto& z : s.psi)
            CHECK(std::norm(z) == doctest::Approx(100.0).epsilon(1e-12));
    }
}

TEST_CASE("shell_state phases stay uniform")
{
    // Pool phases over many small shell states; each marginal is uniform by
    // the global-rotation symmetry of the walk.
    const PreparedLattice lat(LatticeSpec{{10, 10}, Boundary::periodic});
    std::vector<double> u;
    for (int r = 0; r < 100; ++r) {
        Rng rng(derive_seed(77, static_cast<std::uint64_t>(r)));
        const auto ph = phases_of(shell_state(lat, ModelParams{}, 100.0, 100.0, rng));
        u.push_back(ph[static_cast<std::size_t>(r)]);  // one site per state keeps draws independent
    }
    CHECK(ks_p_value(ks_uniform(u), static_cast<double>(u.size())) > 1e-3);
}

TEST_CASE("shell_state rejects unreachable shells")
{
    const PreparedLattice lat(LatticeSpec{{4}, Boundary::periodic});
    Rng rng(1);
    // Interaction 50 N plus at most 2 J n0 per site of hopping.
    CHECK_THROWS_AS(shell_state(lat, ModelParams{}, 100.0, 251.0, rng), std::invalid_argument);
    CHECK_NOTHROW(shell_state(lat, ModelParams{}, 100.0, 200.0, rng));
    const PreparedLattice single(LatticeSpec{{1}, Boundary::open});
    CHECK_THROWS_AS(shell_state(single, ModelParams{}, 100.0, 60.0, rng), std::invalid_argument);
}

TEST_CASE("perturb: exact norm, zero epsilon, isotropy")
{
    const LatticeSpec spec{{10, 10}, Boundary::periodic};
    Rng rng(4);
    const FieldState s = initial_state(spec, 100.0, rng);
    CHECK(perturb(s, 0.0, rng).psi == s.psi);
    for (int i = 0; i < 20; ++i) {
        const FieldState t = perturb(s, 1e-8, rng);
        CHECK((t.psi - s.psi).norm() == doctest::Approx(1e-8).epsilon(1e-14 * 10));
    }
    CHECK_THROWS_AS(perturb(s, -1.0, rng), std::invalid_argument);

    // Mean over 1e4 draws: each real component has variance eps^2 / (2N) / draws.
    const FieldState zero{Amplitudes::Zero(100), 0.0};
    Amplitudes mean = Amplitudes::Zero(100);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        mean += perturb(zero, 1.0, rng).psi;
    mean /= draws;
    const double sigma = std::sqrt(1.0 / 200.0 / draws);
    int outside = 0;
    for (const auto& z : mean)
        outside += (std::abs(z.real()) > 3 * sigma) + (std::abs(z.imag()) > 3 * sigma);
    // 200 components; about 0.5 expected beyond 3 sigma.
    CHECK(outside <= 4);
}

TEST_CASE("echo with epsilon = 0 retraces the forward leg")
{
    // Roundoff in a chaotic trajectory grows like exp(lambda t); a short
    // reversal keeps the retrace error at the roundoff floor.
    for (const LatticeSpec& spec : {LatticeSpec{{100}, Boundary::periodic},
                                    LatticeSpec{{10, 10}, Boundary::periodic},
                                    LatticeSpec{{4, 4, 4}, Boundary::periodic}}) {
        EchoProtocol p;
        p.tau = 5.0;
        p.epsilon = 0.0;
        p.energy_per_site = 100.0;
        p.seed = 12;
        const EchoRecord r = run_echo(spec, ModelParams{}, p);
        const double bound = 1e-18 * 100.0 * 100.0 * static_cast<double>(spec.site_count());
        for (double ld : r.log_deviation)
            CHECK(std::exp(2.0 * ld) < bound);
    }
}

TEST_CASE("echo record layout and determinism")
{
    EchoProtocol p;
    p.tau = 2.0;
    p.seed = 5;
    const LatticeSpec spec{{10, 10}, Boundary::periodic};
    const EchoRecord a = run_echo(spec, ModelParams{}, p);
    REQUIRE(a.dt_grid.size() == 200);
    CHECK(a.dt_grid.front() == doctest::Approx(0.01));
    CHECK(a.dt_grid.back() == doctest::Approx(2.0));
    CHECK(std::is_sorted(a.dt_grid.begin(), a.dt_grid.end()));
    CHECK(a.seed == 5);
    for (double v : a.log_deviation)
        CHECK(std::isfinite(v));
    // First sample sits near ln(epsilon) plus an O(1) projection offset.
    CHECK(std::abs(a.log_deviation.front() - std::log(1e-8)) < 8.0);

    const EchoRecord b = run_echo(spec, ModelParams{}, p);
    CHECK(a.log_deviation == b.log_deviation);
    CHECK(a.realized_energy == b.realized_energy);
}

TEST_CASE("doubling epsilon shifts the early log deviation by ln 2")
{
    const PreparedLattice lat(LatticeSpec{{10, 10}, Boundary::periodic});
    EchoProtocol p;
    p.tau = 10.0;
    p.seed = 8;
    p.energy_per_site = 100.0;
    const EchoRecord a = run_echo(lat, ModelParams{}, p);
    p.epsilon = 2e-8;
    const EchoRecord b = run_echo(lat, ModelParams{}, p);
    // Same seed, same direction; the tangent regime is linear in epsilon.
    // Rounding in the stored occupations and along the reversed leg grows
    // with the signal and sits near 1e-3 of it at epsilon = 1e-8.
    for (std::size_t k = 0; k < a.log_deviation.size(); k += 100)
        CHECK(std::abs(b.log_deviation[k] - a.log_deviation[k] - std::log(2.0)) < 1e-2);
}

TEST_CASE("protocol validation")
{
    EchoProtocol p;
    CHECK_NOTHROW(p.validate());
    p.tau = 60.005;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EchoProtocol{};
    p.epsilon = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EchoProtocol{};
    p.sample_every = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = EchoProtocol{};
    p.tau = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("single 2D realization grows at about lambda_max and saturates")
{
    const PreparedLattice lat(LatticeSpec{{10, 10}, Boundary::periodic});
    std::vector<double> plateaus;
    for (std::uint64_t seed : {101ull, 102ull, 103ull}) {
        EchoProtocol p;
        p.seed = seed;
        p.energy_per_site = 100.0;
        const EchoRecord r = run_echo(lat, ModelParams{}, p);
        const auto stats = aggregate({r});
        const FitResult f = fit_growth(stats, Curve::G);
        CAPTURE(seed);
        CHECK(f.slope > 0.0);
        // Direct value for this lattice is 0.685 (tangent dynamics, T = 1e4).
        CHECK(f.slope == doctest::Approx(0.685).epsilon(0.10));
        double sum = 0.0;
        const std::size_t tail = r.log_deviation.size() / 10;
        for (std::size_t k = r.log_deviation.size() - tail; k < r.log_deviation.size(); ++k)
            sum += r.log_deviation[k];
        plateaus.push_back(sum / static_cast<double>(tail));
    }
    const auto [lo, hi] = std::minmax_element(plateaus.begin(), plateaus.end());
    CHECK(*hi / *lo < 1.1);
}
