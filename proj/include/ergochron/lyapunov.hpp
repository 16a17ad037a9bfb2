#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ergochron/dynamics.hpp"

namespace ergochron {

/// A value with its standard error.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Coarse-grained local stretching rates lambda_i = ln(|d(t_i)| / |d(t_i - dt_r)|) / dt_r
/// recorded after the burn-in.
struct StretchSeries {
    double dt_r = 0.1;
    std::vector<double> rates;
    long long burn_in_dropped = 0;
};

struct StretchSettings {
    double T = 2e4;          ///< recorded length, model time
    double dt = 1e-3;        ///< integrator step
    double dt_r = 0.1;       ///< renormalisation interval
    double burn_in = -1.0;   ///< time discarded before recording; negative selects auto
    double n0 = 100.0;
    std::optional<double> energy_per_site;  ///< see shell_state; unset: free phases
    std::uint64_t seed = 0;

    // Auto burn-in: a pre-run of `prerun` time units estimates lambda_max, then
    // 50 / lambda_max time units are discarded, clamped to [prerun, burn_in_cap].
    double prerun = 20.0;
    double burn_in_cap = 500.0;
};

/// Autocorrelation phi(k dt_r) of rate fluctuations for k = 0..max_lag.
struct PhiGrid {
    double dt_r = 0.1;
    std::vector<double> phi;
    std::vector<double> error;
};

/// Result of integrating phi up to its noise-floor cutoff.
struct PhiIntegral {
    double tau = 0.0;           ///< integral / phi(0)
    double error = 0.0;
    double integral = 0.0;      ///< int_0^tc phi dt
    double first_moment = 0.0;  ///< int_0^tc t phi dt
    int cutoff_lag = 0;
    double noise_floor = 0.0;
};

/// Thrown when phi never settles into its noise band within the lag window.
class NonConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LyapunovSummary {
    Estimate lambda_max;
    Estimate var_dlambda;  ///< phi(0)
    PhiGrid phi;
    Estimate tau_erg_eq4;
    PhiIntegral integral;
    std::size_t samples = 0;
};

/// Advances (state, delta) by one split step and returns the new tangent
/// vector. The linearisation is that of the discrete split-step map, so it
/// has the same order as the reference trajectory.
Amplitudes tangent_step(const FieldState& state, const Amplitudes& delta,
                        const ModelParams& params, const HoppingSpectrum& spectrum, double dt);

/// Reference trajectory plus tangent vector, renormalised every dt_r.
StretchSeries stretching_rates(const PreparedLattice& lattice, const ModelParams& params,
                               const StretchSettings& settings);

/// Two-trajectory variant: a companion trajectory at distance d0 is evolved
/// with the full nonlinear map and pulled back to distance d0 every dt_r.
StretchSeries stretching_rates_two_trajectory(const PreparedLattice& lattice,
                                              const ModelParams& params,
                                              const StretchSettings& settings,
                                              double d0 = 1e-8);

/// Sample mean with a batch-means standard error.
Estimate lambda_max(const StretchSeries& series, int batches = 20);

/// phi(k) = 1/(M-k) sum_i dl_i dl_{i+k}, dl_i = lambda_i - mean.
/// Requires max_lag < M / 10.
PhiGrid autocorrelation(const StretchSeries& series, int max_lag);

/// Trapezoidal integral of phi up to the first lag after which |phi| stays
/// within twice the noise floor for 10 consecutive lags. The noise floor is
/// the RMS of phi over the last third of the grid. Throws
/// NonConvergenceError when no cutoff exists before that tail.
PhiIntegral tau_erg_eq4(const PhiGrid& phi);

/// Pools independent chains: phi from pooled lag products, errors from
/// batch-to-batch scatter.
LyapunovSummary summarize(const std::vector<StretchSeries>& chains, int max_lag,
                          int batches_per_chain = 10);

}  // namespace ergochron
