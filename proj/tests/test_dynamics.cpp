#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ergochron/dynamics.hpp"
#include "ergochron/echo.hpp"
#include "ergochron/seed.hpp"

using namespace ergochron;

namespace {

Amplitudes random_amplitudes(std::size_t n, double scale, std::uint64_t seed)
{
    Rng rng(seed);
    Amplitudes a(static_cast<Eigen::Index>(n));
    for (auto& z : a)
        z = scale * Complex(rng.normal(), rng.normal());
    return a;
}

double max_relative_gap(const Amplitudes& a, const Amplitudes& b)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j)
        worst = std::max(worst, std::abs(a[j] - b[j]) / std::abs(b[j]));
    return worst;
}

}  // namespace

TEST_CASE("energy closed forms")
{
    const PreparedLattice chain(LatticeSpec{{100}, Boundary::periodic});
    FieldState s;
    s.psi = Amplitudes::Constant(100, Complex(10.0, 0.0));
    // N (-J N_nn n + beta/2 n^2) = 100 (-200 + 50)
    CHECK(energy(s, ModelParams{}, chain.table) == doctest::Approx(-15000.0).epsilon(1e-14));

    const PreparedLattice single(LatticeSpec{{1}, Boundary::open});
    FieldState one;
    one.psi = Amplitudes::Constant(1, Complex(2.0, 0.0));
    CHECK(energy(one, ModelParams{5.0, 0.01}, single.table) == doctest::Approx(0.08));

    FieldState zero;
    zero.psi = Amplitudes::Zero(100);
    CHECK(energy(zero, ModelParams{}, chain.table) == 0.0);
}

TEST_CASE("energy is invariant under a global phase and matches the ordered-pair sum")
{
    const PreparedLattice lat(LatticeSpec{{3, 4}, Boundary::open});
    FieldState s;
    s.psi = random_amplitudes(12, 3.0, 11);
    const ModelParams p{0.7, 0.03};
    double hop = 0.0, inter = 0.0;
    for (std::size_t j = 0; j < 12; ++j) {
        for (int k : lat.table.neighbors(j))
            hop += (std::conj(s.psi[j]) * s.psi[k]).real();
        inter += std::pow(std::norm(s.psi[j]), 2);
    }
    const double expected = -p.J * hop + 0.5 * p.beta * inter;
    CHECK(energy(s, p, lat.table) == doctest::Approx(expected).epsilon(1e-13));
    FieldState rotated = s;
    rotated.psi *= std::polar(1.0, 1.234);
    CHECK(energy(rotated, p, lat.table) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("particle number examples")
{
    FieldState s;
    s.psi = Amplitudes::Constant(100, Complex(10.0, 0.0));
    CHECK(particle_number(s) == doctest::Approx(10000.0));
    s.psi = Amplitudes::Zero(5);
    CHECK(particle_number(s) == 0.0);
    s.psi = Amplitudes::Constant(1, Complex(3.0, 4.0));
    CHECK(particle_number(s) == doctest::Approx(25.0));
    const auto n = occupations(FieldState{Amplitudes::Constant(2, Complex(0.0, 2.0)), 0.0});
    CHECK(n == std::vector<double>{4.0, 4.0});
}

TEST_CASE("energy rejects mismatched sizes")
{
    const PreparedLattice lat(LatticeSpec{{4}, Boundary::periodic});
    FieldState s;
    s.psi = Amplitudes::Zero(3);
    CHECK_THROWS_AS(energy(s, ModelParams{}, lat.table), std::invalid_argument);
}

TEST_CASE("single site: split step rotates the phase by beta n dt")
{
    const PreparedLattice lat(LatticeSpec{{1}, Boundary::open});
    FieldState s;
    s.psi = Amplitudes::Constant(1, Complex(10.0, 0.0));
    const FieldState out = step_split(s, ModelParams{}, lat.spectrum, 0.5);
    CHECK(std::norm(out.psi[0]) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(std::arg(out.psi[0]) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(out.time == 0.5);
}

TEST_CASE("single site: RK4 phase error below 1e-10")
{
    const PreparedLattice lat(LatticeSpec{{1}, Boundary::open});
    FieldState s;
    s.psi = Amplitudes::Constant(1, Complex(10.0, 0.0));
    for (int i = 0; i < 500; ++i)
        s = step_rk4(s, ModelParams{}, lat.table, 1e-3);
    const Complex exact = std::polar(10.0, -0.01 * 100.0 * 0.5);
    CHECK(std::abs(std::arg(s.psi[0] / exact)) < 1e-10);
}

TEST_CASE("beta = 0: linear unitary evolution")
{
    const PreparedLattice lat(LatticeSpec{{6, 5}, Boundary::periodic});
    FieldState s;
    s.psi = random_amplitudes(30, 4.0, 3);
    const ModelParams p{1.0, 0.0};
    const double n0 = particle_number(s);
    const double e0 = energy(s, p, lat.table);
    const SplitStepper stepper(lat.spectrum, p, 0.01);
    stepper.advance(s, 1000);
    CHECK(particle_number(s) == doctest::Approx(n0).epsilon(1e-13));
    CHECK(energy(s, p, lat.table) == doctest::Approx(e0).epsilon(1e-11));
}

TEST_CASE("RK4: plane wave with q = pi/2 is stationary at beta = 0")
{
    const PreparedLattice lat(LatticeSpec{{4}, Boundary::periodic});
    FieldState s;
    s.psi.resize(4);
    for (int j = 0; j < 4; ++j)
        s.psi[j] = std::polar(1.0, std::numbers::pi / 2 * j);
    const FieldState start = s;
    for (int i = 0; i < 1000; ++i)
        s = step_rk4(s, ModelParams{1.0, 0.0}, lat.table, 1e-3);
    CHECK((s.psi - start.psi).norm() < 1e-12);
}

TEST_CASE("split step agrees with RK4 on a random 1D state")
{
    const PreparedLattice lat(LatticeSpec{{8}, Boundary::periodic});
    FieldState s;
    s.psi = random_amplitudes(8, 7.0, 21);  // occupations ~ 100
    const ModelParams p;
    FieldState a = s, b = s;
    SplitStepper(lat.spectrum, p, 1e-5).advance(a, 100000);
    for (int i = 0; i < 100000; ++i)
        b = step_rk4(b, p, lat.table, 1e-5);
    CHECK(max_relative_gap(a.psi, b.psi) < 1e-8);
}

TEST_CASE("split step at dt = 1e-3 tracks RK4 over T = 1 on small random lattices")
{
    // Equal occupations with random phases, the states the echo starts from.
    // The gap is the Strang error, second order in dt.
    for (const LatticeSpec& spec : {LatticeSpec{{8}, Boundary::periodic},
                                    LatticeSpec{{3, 3}, Boundary::periodic},
                                    LatticeSpec{{2, 2, 2}, Boundary::open}}) {
        const PreparedLattice lat(spec);
        for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
            Rng rng(seed);
            FieldState a = initial_state(spec, 100.0, rng), b = a;
            SplitStepper(lat.spectrum, ModelParams{}, 1e-3).advance(a, 1000);
            for (int i = 0; i < 10000; ++i)
                b = step_rk4(b, ModelParams{}, lat.table, 1e-4);
            CAPTURE(spec.label());
            CHECK((a.psi - b.psi).norm() / b.psi.norm() < 1e-6);
        }
    }
}

TEST_CASE("split step is time symmetric")
{
    const PreparedLattice lat(LatticeSpec{{4, 4, 4}, Boundary::periodic});
    FieldState s;
    s.psi = random_amplitudes(64, 7.0, 5);
    const ModelParams p;
    FieldState t = step_split(step_split(s, p, lat.spectrum, 1e-3), p, lat.spectrum, -1e-3);
    CHECK(max_relative_gap(t.psi, s.psi) < 1e-12);

    // Many steps forward, as many backward.
    FieldState u = s;
    SplitStepper(lat.spectrum, p, 1e-3).advance(u, 2000);
    SplitStepper(lat.spectrum, p, -1e-3).advance(u, 2000);
    CHECK((u.psi - s.psi).norm() / s.psi.norm() < 1e-10);
}

TEST_CASE("merged multi-step advance matches repeated single steps")
{
    const PreparedLattice lat(LatticeSpec{{10, 10}, Boundary::periodic});
    FieldState a;
    a.psi = random_amplitudes(100, 7.0, 8);
    FieldState b = a;
    const SplitStepper stepper(lat.spectrum, ModelParams{}, 1e-3);
    for (int i = 0; i < 50; ++i)
        stepper.advance(a);
    stepper.advance(b, 50);
    CHECK(max_relative_gap(b.psi, a.psi) < 1e-12);
    CHECK(b.time == doctest::Approx(a.time));
}

TEST_CASE("reverse_params")
{
    const ModelParams p{1.0, 0.01};
    const ModelParams r = reverse_params(p);
    CHECK(r.J == -1.0);
    CHECK(r.beta == -0.01);
    const ModelParams rr = reverse_params(r);
    CHECK(rr.J == p.J);
    CHECK(rr.beta == p.beta);
}

TEST_CASE("conjugate evolution equals evolution under reversed parameters")
{
    const PreparedLattice lat(LatticeSpec{{10, 10}, Boundary::periodic});
    FieldState s;
    s.psi = random_amplitudes(100, 7.0, 9);
    const ModelParams p;

    FieldState conj_first;
    conj_first.psi = s.psi.conjugate();
    SplitStepper(lat.spectrum, p, 1e-3).advance(conj_first, 3000);

    FieldState reversed = s;
    SplitStepper(lat.spectrum, reverse_params(p), 1e-3).advance(reversed, 3000);
    // The trajectory is chaotic, so roundoff grows like exp(0.7 t); 3 time units keep it small.
    CHECK(max_relative_gap(conj_first.psi, reversed.psi.conjugate()) < 1e-10);
}

TEST_CASE("evolve sampling contract")
{
    const PreparedLattice lat(LatticeSpec{{5}, Boundary::periodic});
    FieldState s;
    s.psi = random_amplitudes(5, 3.0, 1);
    const SplitStepper stepper(lat.spectrum, ModelParams{}, 1e-2);

    std::vector<double> times;
    auto record = [&](double t, std::span<const double> n) {
        times.push_back(t);
        CHECK(n.size() == 5);
    };
    const FieldState same = evolve(s, stepper, 0.0, 3, record);
    CHECK(times == std::vector<double>{0.0});
    CHECK(same.psi == s.psi);

    times.clear();
    const FieldState end = evolve(s, stepper, 0.1, 3, record);
    REQUIRE(times.size() == 5);  // 0, 3, 6, 9 and the final step 10
    CHECK(times[1] == doctest::Approx(0.03));
    CHECK(times.back() == doctest::Approx(0.1));
    CHECK(end.time == doctest::Approx(0.1));

    CHECK_THROWS_AS(evolve(s, stepper, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(evolve(s, stepper, 0.105, 1), std::invalid_argument);
    CHECK_THROWS_AS(SplitStepper(lat.spectrum, ModelParams{}, 0.0), std::invalid_argument);
}

TEST_CASE("conservation over T = 100 at dt = 1e-3 on the three lattices")
{
    for (const LatticeSpec& spec : {LatticeSpec{{100}, Boundary::periodic},
                                    LatticeSpec{{10, 10}, Boundary::periodic},
                                    LatticeSpec{{4, 4, 4}, Boundary::periodic}}) {
        CAPTURE(spec.label());
        const PreparedLattice lat(spec);
        Rng rng(derive_seed(99, spec.site_count()));
        FieldState s = shell_state(lat, ModelParams{}, 100.0, 100.0, rng);
        const auto before = conserved(s, ModelParams{}, lat.table);
        SplitStepper(lat.spectrum, ModelParams{}, 1e-3).advance(s, 100000);
        const auto after = conserved(s, ModelParams{}, lat.table);
        CHECK(std::abs(after.particle_number / before.particle_number - 1.0) < 1e-12);
        CHECK(std::abs(after.energy / before.energy - 1.0) < 1e-6);
    }
}
