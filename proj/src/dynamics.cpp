#include "ergochron/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ergochron {

namespace {

void require_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": size mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
}

}  // namespace

ModelParams reverse_params(const ModelParams& params)
{
    return {-params.J, -params.beta};
}

double energy(const FieldState& state, const ModelParams& params, const NeighborTable& table)
{
    require_size(state.size(), table.site_count(), "energy");
    double hopping = 0.0;
    double interaction = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const Complex pj = state.psi[j];
        Complex sum = 0.0;
        for (int k : table.neighbors(j))
            sum += state.psi[k];
        hopping += (std::conj(pj) * sum).real();
        const double n = std::norm(pj);
        interaction += n * n;
    }
    return -params.J * hopping + 0.5 * params.beta * interaction;
}

double particle_number(const FieldState& state)
{
    return state.psi.squaredNorm();
}

ConservedReport conserved(const FieldState& state, const ModelParams& params,
                          const NeighborTable& table)
{
    return {energy(state, params, table), particle_number(state)};
}

std::vector<double> occupations(const FieldState& state)
{
    std::vector<double> n(state.size());
    for (std::size_t j = 0; j < n.size(); ++j)
        n[j] = std::norm(state.psi[j]);
    return n;
}

HoppingSpectrum::HoppingSpectrum(const NeighborTable& table)
{
    const auto n = static_cast<Eigen::Index>(table.site_count());
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (int k : table.neighbors(static_cast<std::size_t>(j)))
            adjacency(j, k) = 1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adjacency);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition of the hopping matrix failed");
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Eigen::MatrixXcd HoppingSpectrum::propagator(double theta) const
{
    const Eigen::Index n = eigenvalues_.size();
    Eigen::MatrixXcd scaled(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const Complex phase = std::polar(1.0, theta * eigenvalues_[m]);
        scaled.col(m) = eigenvectors_.col(m).cast<Complex>() * phase;
    }
    Eigen::MatrixXcd u = scaled * eigenvectors_.transpose().cast<Complex>();
    // The product is unitary only to a few ulps times n, and that defect
    // accumulates in the norm over long runs. Newton-Schulz steps toward the
    // unitary polar factor bring it down to roundoff.
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    for (int it = 0; it < 3; ++it)
        u = u * (1.5 * eye - 0.5 * (u.adjoint() * u));
    return u;
}

PreparedLattice::PreparedLattice(LatticeSpec s)
    : spec(std::move(s)), table(build_neighbor_table(spec)), spectrum(table)
{
}

SplitStepper::SplitStepper(const HoppingSpectrum& spectrum, const ModelParams& params, double dt)
    : params_(params),
      dt_(dt),
      linear_(spectrum.propagator(params.J * dt)),
      scratch_(static_cast<Eigen::Index>(spectrum.size()))
{
    if (dt == 0.0 || !std::isfinite(dt))
        throw std::invalid_argument("split-step dt must be finite and nonzero");
}

void SplitStepper::nonlinear(Amplitudes& psi, double h) const
{
    const double rate = -params_.beta * h;
    for (Eigen::Index j = 0; j < psi.size(); ++j)
        psi[j] *= std::polar(1.0, rate * std::norm(psi[j]));
}

void SplitStepper::nonlinear_half(Amplitudes& psi, Amplitudes& tangent) const
{
    // psi' = psi exp(-i beta h |psi|^2), differentiated at fixed h:
    // dpsi' = exp(-i beta h |psi|^2) (dpsi - i beta h psi 2 Re(psi^* dpsi)).
    const double h = 0.5 * dt_;
    const double rate = -params_.beta * h;
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
        const Complex p = psi[j];
        const Complex phase = std::polar(1.0, rate * std::norm(p));
        const double dn = 2.0 * (std::conj(p) * tangent[j]).real();
        tangent[j] = phase * (tangent[j] - Complex(0.0, params_.beta * h * dn) * p);
        psi[j] = p * phase;
    }
}

// Both substeps conserve the norm in exact arithmetic, but their rounding is
// slightly biased: about 1e-17 relative per step, 1e-12 after 1e5 steps.
// Rescaling to the entry norm removes the bias and leaves only unbiased noise.
namespace {

void restore_norm(Amplitudes& psi, double target)
{
    const double now = psi.squaredNorm();
    if (now > 0.0)
        psi *= std::sqrt(target / now);
}

}  // namespace

void SplitStepper::advance(FieldState& state) const
{
    require_size(state.size(), size(), "split step");
    const double norm = state.psi.squaredNorm();
    nonlinear_half(state.psi);
    scratch_.noalias() = linear_ * state.psi;
    state.psi.swap(scratch_);
    nonlinear_half(state.psi);
    restore_norm(state.psi, norm);
    state.time += dt_;
}

void SplitStepper::advance(FieldState& state, long long steps) const
{
    require_size(state.size(), size(), "split step");
    if (steps <= 0)
        return;
    const double norm = state.psi.squaredNorm();
    nonlinear_half(state.psi);
    for (long long s = 0; s < steps; ++s) {
        scratch_.noalias() = linear_ * state.psi;
        state.psi.swap(scratch_);
        nonlinear(state.psi, s + 1 < steps ? dt_ : 0.5 * dt_);
        restore_norm(state.psi, norm);
    }
    state.time += static_cast<double>(steps) * dt_;
}

void SplitStepper::advance(FieldState& state, Amplitudes& tangent) const
{
    require_size(state.size(), size(), "split step");
    require_size(static_cast<std::size_t>(tangent.size()), size(), "tangent step");
    const double norm = state.psi.squaredNorm();
    nonlinear_half(state.psi, tangent);
    scratch_.noalias() = linear_ * state.psi;
    state.psi.swap(scratch_);
    scratch_.noalias() = linear_ * tangent;
    tangent.swap(scratch_);
    nonlinear_half(state.psi, tangent);
    restore_norm(state.psi, norm);
    state.time += dt_;
}

FieldState step_split(const FieldState& state, const ModelParams& params,
                      const HoppingSpectrum& spectrum, double dt)
{
    FieldState out = state;
    SplitStepper(spectrum, params, dt).advance(out);
    return out;
}

Amplitudes equation_of_motion(const Amplitudes& psi, const ModelParams& params,
                              const NeighborTable& table)
{
    require_size(static_cast<std::size_t>(psi.size()), table.site_count(), "equation of motion");
    Amplitudes rhs(psi.size());
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
        Complex hop = 0.0;
        for (int k : table.neighbors(static_cast<std::size_t>(j)))
            hop += psi[k];
        // i dpsi/dt = -J hop + beta |psi|^2 psi
        const Complex force = -params.J * hop + params.beta * std::norm(psi[j]) * psi[j];
        rhs[j] = Complex(0.0, -1.0) * force;
    }
    return rhs;
}

FieldState step_rk4(const FieldState& state, const ModelParams& params,
                    const NeighborTable& table, double dt)
{
    const Amplitudes& y = state.psi;
    const Amplitudes k1 = equation_of_motion(y, params, table);
    const Amplitudes k2 = equation_of_motion(y + 0.5 * dt * k1, params, table);
    const Amplitudes k3 = equation_of_motion(y + 0.5 * dt * k2, params, table);
    const Amplitudes k4 = equation_of_motion(y + dt * k3, params, table);
    FieldState out;
    out.psi = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.time = state.time + dt;
    return out;
}

long long step_count(double duration, double dt)
{
    if (dt <= 0.0 || !std::isfinite(dt) || !std::isfinite(duration) || duration < 0.0)
        throw std::invalid_argument("duration must be >= 0 and dt > 0");
    const double ratio = duration / dt;
    const long long steps = std::llround(ratio);
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio))
        throw std::invalid_argument("duration " + std::to_string(duration) +
                                    " is not an integer multiple of dt " + std::to_string(dt));
    return steps;
}

FieldState evolve(FieldState state, const SplitStepper& stepper, double T, int sample_every,
                  const OccupationObserver& observer)
{
    if (sample_every < 1)
        throw std::invalid_argument("sample_every must be >= 1");
    const long long steps = step_count(T, std::abs(stepper.dt()));
    const double t0 = state.time;
    std::vector<double> n(state.size());

    auto emit = [&] {
        if (!observer)
            return;
        for (std::size_t j = 0; j < n.size(); ++j)
            n[j] = std::norm(state.psi[j]);
        observer(state.time, n);
    };

    emit();
    for (long long s = 1; s <= steps; ++s) {
        stepper.advance(state);
        state.time = t0 + static_cast<double>(s) * stepper.dt();
        if (s % sample_every == 0 || s == steps)
            emit();
    }
    return state;
}

}  // namespace ergochron
