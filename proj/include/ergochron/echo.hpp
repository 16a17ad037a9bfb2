#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergochron/dynamics.hpp"
#include "ergochron/seed.hpp"

namespace ergochron {

/// Settings of one Loschmidt-echo experiment.
struct EchoProtocol {
    double tau = 60.0;        ///< reversal time; the reversed leg also lasts tau
    double dt = 1e-3;         ///< integrator step
    int sample_every = 10;    ///< steps between recorded samples
    double epsilon = 1e-8;    ///< norm of the perturbation added at reversal
    double n0 = 100.0;        ///< initial occupation of every site
    /// Energy shell E / N of the initial state; unset keeps free random phases.
    std::optional<double> energy_per_site;
    std::uint64_t seed = 0;

    double sample_interval() const { return dt * sample_every; }
    /// Number of samples on each leg; throws if tau is off the sample grid.
    long long samples_per_leg() const;
    void validate() const;
};

/// Result of one echo: ln sqrt(sum_i dn_i(t)^2) on the grid t = k * h,
/// k = 1..K, where dn_i(t) = n_i(tau + t) - n_i(tau - t).
struct EchoRecord {
    std::vector<double> dt_grid;
    std::vector<double> log_deviation;
    double realized_energy = 0.0;
    std::uint64_t seed = 0;
};

/// psi_j = sqrt(n0) exp(i theta_j) with independent uniform phases.
FieldState initial_state(const LatticeSpec& spec, double n0, Rng& rng);

/// Equal occupations n0 with random phases moved onto the shell
/// E = energy_per_site * N. Starting from initial_state, single-site phases
/// are redrawn (with a width shrinking as the shell is approached) and kept
/// whenever |E - target| decreases. The walk commutes with global phase
/// rotations, so each phase stays uniformly distributed on its own.
///
/// Throws std::invalid_argument when the shell is outside the reachable
/// energy range at fixed occupations, std::runtime_error if the walk stalls.
FieldState shell_state(const PreparedLattice& lattice, const ModelParams& params, double n0,
                       double energy_per_site, Rng& rng);

/// shell_state when a shell is given, initial_state otherwise.
FieldState prepare_state(const PreparedLattice& lattice, const ModelParams& params, double n0,
                         const std::optional<double>& energy_per_site, Rng& rng);

/// Adds an isotropic random vector (in the 2N real components) of norm
/// exactly epsilon.
FieldState perturb(const FieldState& state, double epsilon, Rng& rng);

/// Forward leg to tau with occupation recording, perturbation and sign
/// reversal of (J, beta), reversed leg of length tau.
EchoRecord run_echo(const PreparedLattice& lattice, const ModelParams& params,
                    const EchoProtocol& protocol);

EchoRecord run_echo(const LatticeSpec& spec, const ModelParams& params,
                    const EchoProtocol& protocol);

}  // namespace ergochron
