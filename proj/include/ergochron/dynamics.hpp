#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ergochron/lattice.hpp"

namespace ergochron {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

/// Coefficients of the discrete Gross-Pitaevskii equation
///
///     i dpsi_j/dt = -J sum_{k in NN(j)} psi_k + beta |psi_j|^2 psi_j
///
/// in units with hbar = 1.
struct ModelParams {
    double J = 1.0;
    double beta = 0.01;
};

/// Flips the sign of the Hamiltonian. Applying it twice is the identity.
ModelParams reverse_params(const ModelParams& params);

struct FieldState {
    Amplitudes psi;
    double time = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(psi.size()); }
};

struct ConservedReport {
    double energy = 0.0;
    double particle_number = 0.0;
};

/// H = -J sum_j sum_{k in NN(j)} psi_j^* psi_k + (beta/2) sum_j |psi_j|^4.
///
/// The hopping sum runs over ordered neighbour pairs, so every bond is
/// counted in both directions; with this convention Hamilton's equations
/// i dpsi_j/dt = dH/dpsi_j^* reproduce the equation of motion exactly.
double energy(const FieldState& state, const ModelParams& params, const NeighborTable& table);

double particle_number(const FieldState& state);

ConservedReport conserved(const FieldState& state, const ModelParams& params,
                          const NeighborTable& table);

/// Occupations n_j = |psi_j|^2.
std::vector<double> occupations(const FieldState& state);

/// Eigendecomposition A = V diag(w) V^T of the lattice adjacency matrix.
/// Immutable after construction and shared read-only between workers.
class HoppingSpectrum {
  public:
    explicit HoppingSpectrum(const NeighborTable& table);

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

    /// exp(i * theta * A), the exact free propagator for J * dt = theta.
    Eigen::MatrixXcd propagator(double theta) const;

  private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

/// Strang split-step integrator: half nonlinear phase rotation, exact
/// linear hopping step in the adjacency eigenbasis, half nonlinear rotation.
///
/// Both substeps are phase rotations or unitary maps, so the particle number
/// is conserved to roundoff, and the map is time symmetric: a step with -dt
/// inverts a step with +dt. A stepper owns scratch storage and must not be
/// shared between threads; copy it instead.
class SplitStepper {
  public:
    SplitStepper(const HoppingSpectrum& spectrum, const ModelParams& params, double dt);

    const ModelParams& params() const { return params_; }
    double dt() const { return dt_; }
    std::size_t size() const { return static_cast<std::size_t>(linear_.rows()); }

    void advance(FieldState& state) const;

    /// `steps` consecutive steps with adjacent nonlinear half steps merged.
    /// Agrees with repeated single steps up to roundoff.
    void advance(FieldState& state, long long steps) const;

    /// Advances the state and a tangent vector with the exact linearisation
    /// of the same discrete map.
    void advance(FieldState& state, Amplitudes& tangent) const;

  private:
    void nonlinear(Amplitudes& psi, double h) const;
    void nonlinear_half(Amplitudes& psi) const { nonlinear(psi, 0.5 * dt_); }
    void nonlinear_half(Amplitudes& psi, Amplitudes& tangent) const;

    ModelParams params_;
    double dt_;
    Eigen::MatrixXcd linear_;
    mutable Amplitudes scratch_;
};

/// Single split step. Builds the propagator on every call; use SplitStepper
/// inside loops.
FieldState step_split(const FieldState& state, const ModelParams& params,
                      const HoppingSpectrum& spectrum, double dt);

/// Classical fourth-order Runge-Kutta step of the equation of motion,
/// evaluated directly on the neighbour table. Kept as an independent
/// reference for the split-step integrator.
FieldState step_rk4(const FieldState& state, const ModelParams& params,
                    const NeighborTable& table, double dt);

/// Right-hand side dpsi/dt of the equation of motion.
Amplitudes equation_of_motion(const Amplitudes& psi, const ModelParams& params,
                              const NeighborTable& table);

/// Called with (time, occupations) at every sample point.
using OccupationObserver = std::function<void(double, std::span<const double>)>;

/// Applies the stepper round(T / dt) times. The observer, when set, sees
/// t = 0, every sample_every-th step and the final time.
///
/// Throws std::invalid_argument if T is not an integer number of steps or
/// sample_every < 1.
FieldState evolve(FieldState state, const SplitStepper& stepper, double T, int sample_every,
                  const OccupationObserver& observer = {});

/// Lattice geometry together with everything the integrators precompute
/// from it. Immutable; share one instance read-only between workers.
struct PreparedLattice {
    LatticeSpec spec;
    NeighborTable table;
    HoppingSpectrum spectrum;

    explicit PreparedLattice(LatticeSpec s);
    std::size_t site_count() const { return table.site_count(); }
};

/// Number of steps covering `duration` with step `dt`; throws if the ratio is
/// not an integer within roundoff.
long long step_count(double duration, double dt);

}  // namespace ergochron
