#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergochron/echo.hpp"
#include "ergochron/lyapunov.hpp"

namespace ergochron {

/// Per-grid-point ensemble statistics of echo log-deviations L = ln|dX(t)|:
/// G = <L>, W = ln <e^L>, sigma_G2 = unbiased variance of L, and the 90th
/// percentile of L (used to detect early saturation of fast samples).
struct EnsembleStats {
    std::vector<double> dt_grid;
    std::vector<std::size_t> count;
    std::vector<double> G, G_error;
    std::vector<double> W, W_error;
    std::vector<double> sigma_G2, sigma_G2_error;
    std::vector<double> upper_decile;

    std::size_t size() const { return dt_grid.size(); }
};

enum class Curve { G, W };

std::string to_string(Curve c);

/// Fit-window selection. Automatic windows start where the curve has risen
/// `rise` log units above its first value and end before it comes within
/// `margin` log units of its plateau (mean of the final `plateau_fraction`
/// of the grid). W windows also end where the upper-decile curve saturates
/// when `top_decile_cut` is set. `t_lo` / `t_hi` override either end.
struct WindowPolicy {
    double rise = 5.0;
    double margin = 3.0;
    double plateau_fraction = 0.1;
    bool top_decile_cut = true;
    std::size_t min_points = 10;
    std::optional<double> t_lo;
    std::optional<double> t_hi;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double residual_rms = 0.0;
    double slope_error = 0.0;  ///< OLS formula; replaced by bootstrap_slope_error when records exist
    std::size_t points = 0;
};

class FitWindowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Verdict { ergodic, not_ergodized, inconclusive };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct VerdictPolicy {
    double plateau_tolerance = 0.5;  ///< |plateau - expected| <= tol * expected
    double drift_limit = 0.3;        ///< spread of quarter medians relative to plateau
};

/// sigma_G^2(t) / (2 t) and its plateau test over a window.
struct VarianceRatio {
    std::vector<double> dt_grid;
    std::vector<double> ratio;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double plateau = 0.0;            ///< median of the ratio inside the window
    std::vector<double> quarter_medians;
    double drift = 0.0;              ///< (max - min) of quarter medians / plateau
    bool monotone = false;           ///< quarter medians strictly ordered
    double expected = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

/// Aggregates records sharing one grid. Values at each grid point are sorted
/// before summation, which makes the result independent of record order.
EnsembleStats aggregate(const std::vector<EchoRecord>& records);

/// Ordinary least squares of y on t.
FitResult fit_line(const std::vector<double>& t, const std::vector<double>& y);

/// Linear fit of G or W inside the policy window. Throws FitWindowError when
/// fewer than min_points grid points remain.
FitResult fit_growth(const EnsembleStats& stats, Curve which, const WindowPolicy& policy = {});

/// Standard deviation of the fitted slope over `resamples` bootstrap
/// resamples of the record ensemble, with the window held fixed.
double bootstrap_slope_error(const std::vector<EchoRecord>& records, Curve which, double t_lo,
                             double t_hi, int resamples = 200, std::uint64_t seed = 1);

VarianceRatio variance_ratio_curve(const EnsembleStats& stats, double t_lo, double t_hi,
                                   double expected_level, const VerdictPolicy& policy = {});

/// (Lambda - lambda_max) / <dlambda^2> with first-order error propagation.
Estimate tau_erg_eq9(const Estimate& lambda_max, const Estimate& Lambda,
                     const Estimate& var_dlambda);

/// Empirical variance estimate 4 lambda_max^2 / N_nn^2.
double var_empirical_eq10(double lambda_max, int n_nn);

/// (Lambda - lambda_max) N_nn^2 / (4 lambda_max^2).
double tau_erg_eq11(double lambda_max, double Lambda, int n_nn);

struct AndersonWeissResult {
    double lhs = 0.0;        ///< (1/t) ln <exp(sum dlambda dt_r)> over windows of length t
    double lhs_error = 0.0;
    double rhs = 0.0;        ///< int_0^inf phi dt
    double constant_c = 1.0; ///< exp(-int t phi dt)
    double rhs_finite = 0.0; ///< rhs + ln(C) / t
    std::size_t windows = 0;
    bool few_windows = false;  ///< fewer than 100 windows
};

AndersonWeissResult anderson_weiss_check(const StretchSeries& series, double t,
                                         const PhiIntegral& integral);

/// Same, estimating phi from the series itself up to max_lag.
AndersonWeissResult anderson_weiss_check(const StretchSeries& series, double t, int max_lag);

struct MomentCheck {
    double dt = 0.0;
    std::size_t n = 0;
    double skewness = 0.0;
    double skewness_error = 0.0;
    double excess_kurtosis = 0.0;
    double kurtosis_error = 0.0;
    bool non_gaussian = false;
};

/// Moments of the log-deviation sample at the grid points nearest to each
/// requested time. A sample is flagged when |skewness| or |excess kurtosis|
/// exceeds three standard errors. Requires at least 50 records.
std::vector<MomentCheck> gaussianity_check(const std::vector<EchoRecord>& records,
                                           const std::vector<double>& dt_values);

/// One row of the summary table.
struct ErgodizationReport {
    std::string label;
    std::size_t sites = 0;
    int n_nn = 0;
    Estimate lambda_max_echo;
    Estimate Lambda;
    Estimate lambda_max_direct;
    Estimate var_dlambda_direct;
    double var_dlambda_empirical = 0.0;
    Estimate tau_erg_eq4;
    Estimate tau_erg_eq9;
    double tau_erg_eq11 = 0.0;
    double plateau_level = 0.0;
    double plateau_expected = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

ErgodizationReport build_report(const std::string& label, std::size_t sites, int n_nn,
                                const EnsembleStats& stats, const FitResult& fit_g,
                                const FitResult& fit_w, const LyapunovSummary& direct,
                                const VerdictPolicy& policy = {});

}  // namespace ergochron
