#include "ergochron/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ergochron/echo.hpp"
#include "ergochron/seed.hpp"

namespace ergochron {

namespace {

double mean_of(const double* x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i];
    return n ? s / static_cast<double>(n) : 0.0;
}

double sample_sd(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean_of(v.data(), v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// sums[k] += sum_i (x_i - mean)(x_{i+k} - mean) for k = 0..max_lag.
void accumulate_lag_products(const double* x, std::size_t n, double mean, int max_lag,
                             std::vector<double>& sums)
{
    for (int k = 0; k <= max_lag; ++k) {
        const auto lag = static_cast<std::size_t>(k);
        if (lag >= n)
            break;
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i)
            s += (x[i] - mean) * (x[i + lag] - mean);
        sums[lag] += s;
    }
}

std::vector<double> lag_autocorrelation(const double* x, std::size_t n, double mean, int max_lag)
{
    std::vector<double> sums(static_cast<std::size_t>(max_lag) + 1, 0.0);
    accumulate_lag_products(x, n, mean, max_lag, sums);
    for (int k = 0; k <= max_lag; ++k)
        sums[k] /= static_cast<double>(n - static_cast<std::size_t>(k));
    return sums;
}

double trapezoid_to(const std::vector<double>& phi, int cutoff, double dt_r)
{
    double s = 0.5 * phi[0];
    for (int j = 1; j < cutoff; ++j)
        s += phi[j];
    if (cutoff > 0)
        s += 0.5 * phi[cutoff];
    return s * dt_r;
}

Amplitudes random_unit_tangent(std::size_t n, Rng& rng)
{
    Amplitudes t(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < t.size(); ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        t[j] = Complex(re, im);
    }
    t /= t.norm();
    return t;
}

// Runs `interval` (one renormalisation period, returning ln of the growth
// factor) through burn-in and recording.
template <class Interval>
StretchSeries record_rates(const StretchSettings& settings, Interval&& interval)
{
    if (!(settings.dt_r > 0.0))
        throw std::invalid_argument("stretching rates: dt_r must be > 0");
    const long long n_record = step_count(settings.T, settings.dt_r);
    if (n_record < 1)
        throw std::invalid_argument("stretching rates: T shorter than dt_r");

    StretchSeries out;
    out.dt_r = settings.dt_r;

    long long n_burn = 0;
    if (settings.burn_in >= 0.0) {
        n_burn = std::llround(settings.burn_in / settings.dt_r);
        for (long long i = 0; i < n_burn; ++i)
            interval();
    } else {
        const long long n_pre = std::max(1LL, std::llround(settings.prerun / settings.dt_r));
        double sum = 0.0;
        for (long long i = 0; i < n_pre; ++i)
            sum += interval();
        const double estimate = sum / (static_cast<double>(n_pre) * settings.dt_r);
        double burn_time = estimate > 0.0 ? 50.0 / estimate : settings.burn_in_cap;
        burn_time = std::clamp(burn_time, settings.prerun, settings.burn_in_cap);
        n_burn = std::max(n_pre, std::llround(burn_time / settings.dt_r));
        for (long long i = n_pre; i < n_burn; ++i)
            interval();
    }
    out.burn_in_dropped = n_burn;

    out.rates.resize(static_cast<std::size_t>(n_record));
    for (auto& r : out.rates)
        r = interval() / settings.dt_r;
    return out;
}

}  // namespace

Amplitudes tangent_step(const FieldState& state, const Amplitudes& delta,
                        const ModelParams& params, const HoppingSpectrum& spectrum, double dt)
{
    FieldState s = state;
    Amplitudes t = delta;
    SplitStepper(spectrum, params, dt).advance(s, t);
    return t;
}

StretchSeries stretching_rates(const PreparedLattice& lattice, const ModelParams& params,
                               const StretchSettings& settings)
{
    const long long per_interval = step_count(settings.dt_r, settings.dt);
    Rng rng(settings.seed);
    FieldState state = prepare_state(lattice, params, settings.n0, settings.energy_per_site, rng);
    Amplitudes tangent = random_unit_tangent(lattice.site_count(), rng);
    const SplitStepper stepper(lattice.spectrum, params, settings.dt);

    return record_rates(settings, [&] {
        for (long long s = 0; s < per_interval; ++s)
            stepper.advance(state, tangent);
        const double norm = tangent.norm();
        tangent /= norm;
        return std::log(norm);
    });
}

StretchSeries stretching_rates_two_trajectory(const PreparedLattice& lattice,
                                              const ModelParams& params,
                                              const StretchSettings& settings, double d0)
{
    if (!(d0 > 0.0))
        throw std::invalid_argument("two-trajectory rates: d0 must be > 0");
    const long long per_interval = step_count(settings.dt_r, settings.dt);
    Rng rng(settings.seed);
    FieldState reference = prepare_state(lattice, params, settings.n0, settings.energy_per_site, rng);
    FieldState companion = reference;
    companion.psi += d0 * random_unit_tangent(lattice.site_count(), rng);
    const SplitStepper stepper(lattice.spectrum, params, settings.dt);

    return record_rates(settings, [&] {
        for (long long s = 0; s < per_interval; ++s) {
            stepper.advance(reference);
            stepper.advance(companion);
        }
        Amplitudes sep = companion.psi - reference.psi;
        const double distance = sep.norm();
        companion.psi = reference.psi + (d0 / distance) * sep;
        return std::log(distance / d0);
    });
}

Estimate lambda_max(const StretchSeries& series, int batches)
{
    const auto& r = series.rates;
    if (r.empty())
        throw std::invalid_argument("lambda_max: empty series");
    Estimate e;
    e.value = mean_of(r.data(), r.size());
    const std::size_t b = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(batches, 1)),
                                                  1, r.size());
    if (b < 2)
        return e;
    const std::size_t len = r.size() / b;
    std::vector<double> means(b);
    for (std::size_t i = 0; i < b; ++i)
        means[i] = mean_of(r.data() + i * len, len);
    e.error = sample_sd(means) / std::sqrt(static_cast<double>(b));
    return e;
}

PhiGrid autocorrelation(const StretchSeries& series, int max_lag)
{
    const std::size_t m = series.rates.size();
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) * 10 >= m)
        throw std::invalid_argument("autocorrelation: max_lag " + std::to_string(max_lag) +
                                    " must be < series length / 10 (length " + std::to_string(m) +
                                    ")");
    const double mean = mean_of(series.rates.data(), m);

    PhiGrid g;
    g.dt_r = series.dt_r;
    g.phi = lag_autocorrelation(series.rates.data(), m, mean, max_lag);

    // Error bars from the scatter of 10 contiguous batches.
    const std::size_t nb = 10;
    const std::size_t len = m / nb;
    std::vector<std::vector<double>> per_batch;
    for (std::size_t b = 0; b < nb; ++b)
        per_batch.push_back(lag_autocorrelation(series.rates.data() + b * len, len, mean, max_lag));
    g.error.resize(g.phi.size());
    std::vector<double> col(nb);
    for (std::size_t k = 0; k < g.phi.size(); ++k) {
        for (std::size_t b = 0; b < nb; ++b)
            col[b] = per_batch[b][k];
        g.error[k] = sample_sd(col) / std::sqrt(static_cast<double>(nb));
    }
    return g;
}

PhiIntegral tau_erg_eq4(const PhiGrid& grid)
{
    const auto& phi = grid.phi;
    if (phi.size() < 12)
        throw std::invalid_argument("tau_erg_eq4: need at least 12 lags");
    if (!(phi[0] > 0.0))
        throw std::invalid_argument("tau_erg_eq4: phi(0) must be > 0");

    const int max_lag = static_cast<int>(phi.size()) - 1;
    const int tail_start = max_lag - max_lag / 3;
    double tail_sq = 0.0;
    for (int k = tail_start + 1; k <= max_lag; ++k)
        tail_sq += phi[k] * phi[k];
    const double noise = std::sqrt(tail_sq / static_cast<double>(max_lag - tail_start));
    const double band = 2.0 * noise;

    int cutoff = -1;
    for (int k = 1; k + 9 <= max_lag && k <= tail_start; ++k) {
        bool inside = true;
        for (int j = k; j < k + 10; ++j) {
            if (std::abs(phi[j]) > band) {
                inside = false;
                k = j;  // resume after the excursion
                break;
            }
        }
        if (inside) {
            cutoff = k;
            break;
        }
    }
    if (cutoff < 0)
        throw NonConvergenceError(
            "phi(t) does not settle into its noise band before the tail of the lag window; "
            "the integral may not converge (phi must decay faster than 1/t^2)");

    PhiIntegral out;
    out.cutoff_lag = cutoff;
    out.noise_floor = noise;
    out.integral = trapezoid_to(phi, cutoff, grid.dt_r);
    out.tau = out.integral / phi[0];

    double moment = 0.0;
    for (int j = 1; j <= cutoff; ++j)
        moment += (j == cutoff ? 0.5 : 1.0) * (j * grid.dt_r) * phi[j];
    out.first_moment = moment * grid.dt_r;

    if (grid.error.size() == phi.size()) {
        double var_int = 0.25 * grid.error[0] * grid.error[0];
        for (int j = 1; j <= cutoff; ++j) {
            const double w = j == cutoff ? 0.5 : 1.0;
            var_int += w * w * grid.error[j] * grid.error[j];
        }
        const double rel_int = out.integral != 0.0
                                   ? std::sqrt(var_int) * grid.dt_r / std::abs(out.integral)
                                   : 0.0;
        const double rel_0 = grid.error[0] / phi[0];
        out.error = std::abs(out.tau) * std::hypot(rel_int, rel_0);
    }
    return out;
}

LyapunovSummary summarize(const std::vector<StretchSeries>& chains, int max_lag,
                          int batches_per_chain)
{
    if (chains.empty())
        throw std::invalid_argument("summarize: no chains");
    const double dt_r = chains.front().dt_r;
    std::size_t total = 0;
    double sum = 0.0;
    for (const auto& c : chains) {
        if (c.dt_r != dt_r)
            throw std::invalid_argument("summarize: chains use different dt_r");
        if (c.rates.empty())
            throw std::invalid_argument("summarize: empty chain");
        total += c.rates.size();
        sum += std::accumulate(c.rates.begin(), c.rates.end(), 0.0);
    }
    const double mean = sum / static_cast<double>(total);

    LyapunovSummary out;
    out.samples = total;
    out.phi.dt_r = dt_r;

    std::vector<double> sums(static_cast<std::size_t>(max_lag) + 1, 0.0);
    std::vector<double> counts(sums.size(), 0.0);
    for (const auto& c : chains) {
        if (static_cast<std::size_t>(max_lag) * 10 >= c.rates.size())
            throw std::invalid_argument("summarize: max_lag must be < chain length / 10");
        accumulate_lag_products(c.rates.data(), c.rates.size(), mean, max_lag, sums);
        for (std::size_t k = 0; k < sums.size(); ++k)
            counts[k] += static_cast<double>(c.rates.size() - k);
    }
    out.phi.phi.resize(sums.size());
    for (std::size_t k = 0; k < sums.size(); ++k)
        out.phi.phi[k] = sums[k] / counts[k];

    // Batch statistics for error bars.
    std::vector<double> batch_means;
    std::vector<std::vector<double>> batch_phi;
    for (const auto& c : chains) {
        const std::size_t nb = static_cast<std::size_t>(std::max(batches_per_chain, 1));
        const std::size_t len = c.rates.size() / nb;
        if (len <= static_cast<std::size_t>(max_lag) + 1)
            throw std::invalid_argument("summarize: batches too short for max_lag");
        for (std::size_t b = 0; b < nb; ++b) {
            const double* x = c.rates.data() + b * len;
            batch_means.push_back(mean_of(x, len));
            batch_phi.push_back(lag_autocorrelation(x, len, mean, max_lag));
        }
    }
    const double nb = static_cast<double>(batch_means.size());
    out.lambda_max = {mean, sample_sd(batch_means) / std::sqrt(nb)};

    out.phi.error.resize(sums.size());
    std::vector<double> col(batch_phi.size());
    for (std::size_t k = 0; k < sums.size(); ++k) {
        for (std::size_t b = 0; b < batch_phi.size(); ++b)
            col[b] = batch_phi[b][k];
        out.phi.error[k] = sample_sd(col) / std::sqrt(nb);
    }
    out.var_dlambda = {out.phi.phi[0], out.phi.error[0]};

    out.integral = tau_erg_eq4(out.phi);
    std::vector<double> batch_tau(batch_phi.size());
    for (std::size_t b = 0; b < batch_phi.size(); ++b)
        batch_tau[b] = trapezoid_to(batch_phi[b], out.integral.cutoff_lag, dt_r) / batch_phi[b][0];
    out.tau_erg_eq4 = {out.integral.tau, sample_sd(batch_tau) / std::sqrt(nb)};
    out.integral.error = out.tau_erg_eq4.error;
    return out;
}

}  // namespace ergochron
