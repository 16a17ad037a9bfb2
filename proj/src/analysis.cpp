#include "ergochron/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ergochron/seed.hpp"

namespace ergochron {

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Linear-interpolation quantile of a sorted sample.
double sorted_quantile(const std::vector<double>& s, double q)
{
    if (s.size() == 1)
        return s[0];
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

// ln(mean(exp(v))) shifted by the maximum so neither tail overflows.
double log_mean_exp(const std::vector<double>& v)
{
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m))
        return m;
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s / static_cast<double>(v.size()));
}

const std::vector<double>& curve_of(const EnsembleStats& stats, Curve which)
{
    return which == Curve::G ? stats.G : stats.W;
}

double plateau_of(const std::vector<double>& c, double fraction)
{
    const std::size_t n = c.size();
    const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                          std::ceil(fraction * static_cast<double>(n))));
    double s = 0.0;
    for (std::size_t i = n - tail; i < n; ++i)
        s += c[i];
    return s / static_cast<double>(tail);
}

// Last grid time before `c` first reaches `level`; the final time if never.
double last_time_below(const std::vector<double>& t, const std::vector<double>& c, double level)
{
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] > level)
            return i == 0 ? t[0] - 1.0 : t[i - 1];
    return t.back();
}

}  // namespace

std::string to_string(Curve c)
{
    return c == Curve::G ? "G" : "W";
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::ergodic:
        return "ergodic";
    case Verdict::not_ergodized:
        return "not-ergodized";
    case Verdict::inconclusive:
        break;
    }
    return "inconclusive";
}

Verdict verdict_from_string(const std::string& s)
{
    if (s == "ergodic")
        return Verdict::ergodic;
    if (s == "not-ergodized")
        return Verdict::not_ergodized;
    if (s == "inconclusive")
        return Verdict::inconclusive;
    throw std::invalid_argument("unknown verdict '" + s + "'");
}

EnsembleStats aggregate(const std::vector<EchoRecord>& records)
{
    if (records.empty())
        throw std::invalid_argument("aggregate: no records");
    const auto& grid = records.front().dt_grid;
    for (const auto& r : records) {
        if (r.dt_grid != grid || r.log_deviation.size() != grid.size())
            throw std::invalid_argument("aggregate: records do not share one dt grid");
    }

    const std::size_t K = grid.size();
    const std::size_t M = records.size();
    const double m_d = static_cast<double>(M);
    EnsembleStats st;
    st.dt_grid = grid;
    st.count.assign(K, M);
    st.G.resize(K);
    st.G_error.resize(K);
    st.W.resize(K);
    st.W_error.resize(K);
    st.sigma_G2.resize(K);
    st.sigma_G2_error.resize(K);
    st.upper_decile.resize(K);

    std::vector<double> v(M);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < M; ++i)
            v[i] = records[i].log_deviation[k];
        std::sort(v.begin(), v.end());

        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m_d;
        double ss = 0.0, s4 = 0.0;
        for (double x : v) {
            const double d = x - mean;
            ss += d * d;
            s4 += d * d * d * d;
        }
        const double var = M > 1 ? ss / (m_d - 1.0) : 0.0;

        const double top = v.back();
        double se = 0.0, se2 = 0.0;
        for (double x : v) {
            const double e = std::exp(x - top);
            se += e;
            se2 += e * e;
        }
        const double mean_e = se / m_d;
        double W = top + std::log(mean_e);
        // Jensen bound; roundoff can otherwise put W an ulp below G when all
        // samples are nearly equal.
        W = std::max(W, mean);

        st.G[k] = mean;
        st.W[k] = W;
        st.sigma_G2[k] = var;
        st.upper_decile[k] = sorted_quantile(v, 0.9);
        if (M > 1) {
            st.G_error[k] = std::sqrt(var / m_d);
            const double var_e = std::max(0.0, (se2 / m_d - mean_e * mean_e) * m_d / (m_d - 1.0));
            st.W_error[k] = std::sqrt(var_e / m_d) / mean_e;
            const double m4 = s4 / m_d;
            const double v2 = var * var;
            st.sigma_G2_error[k] =
                M > 3 ? std::sqrt(std::max(0.0, (m4 - v2 * (m_d - 3.0) / (m_d - 1.0)) / m_d)) : 0.0;
        }
    }
    return st;
}

FitResult fit_line(const std::vector<double>& t, const std::vector<double>& y)
{
    const std::size_t n = t.size();
    if (n < 2 || y.size() != n)
        throw std::invalid_argument("fit_line: need at least two paired points");
    const double nd = static_cast<double>(n);
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / nd;
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    if (stt == 0.0)
        throw std::invalid_argument("fit_line: degenerate abscissae");

    FitResult f;
    f.slope = sty / stt;
    f.intercept = ym - f.slope * tm;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * t[i]);
        rss += r * r;
    }
    f.residual_rms = std::sqrt(rss / nd);
    f.slope_error = n > 2 ? std::sqrt(rss / (nd - 2.0) / stt) : 0.0;
    f.t_lo = t.front();
    f.t_hi = t.back();
    f.points = n;
    return f;
}

FitResult fit_growth(const EnsembleStats& stats, Curve which, const WindowPolicy& policy)
{
    const auto& t = stats.dt_grid;
    const auto& c = curve_of(stats, which);
    if (t.empty())
        throw FitWindowError("fit_growth: empty statistics");

    const double start = c.front();
    const double plateau = plateau_of(c, policy.plateau_fraction);

    double t_lo = t.back() + 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] >= start + policy.rise) {
            t_lo = t[i];
            break;
        }
    }
    double t_hi = last_time_below(t, c, plateau - policy.margin);
    if (which == Curve::W && policy.top_decile_cut && !stats.upper_decile.empty()) {
        const double q_plateau = plateau_of(stats.upper_decile, policy.plateau_fraction);
        t_hi = std::min(t_hi, last_time_below(t, stats.upper_decile, q_plateau - policy.margin));
    }
    if (policy.t_lo)
        t_lo = *policy.t_lo;
    if (policy.t_hi)
        t_hi = *policy.t_hi;

    std::vector<double> wt, wy;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t_lo && t[i] <= t_hi) {
            wt.push_back(t[i]);
            wy.push_back(c[i]);
        }
    }
    if (wt.size() < std::max<std::size_t>(policy.min_points, 2)) {
        std::ostringstream msg;
        msg << "fit window for " << to_string(which) << " has " << wt.size()
            << " points (need " << policy.min_points << "): start value " << start
            << ", rise " << policy.rise << ", plateau " << plateau << ", margin "
            << policy.margin << ", window [" << t_lo << ", " << t_hi << "]";
        throw FitWindowError(msg.str());
    }
    return fit_line(wt, wy);
}

double bootstrap_slope_error(const std::vector<EchoRecord>& records, Curve which, double t_lo,
                             double t_hi, int resamples, std::uint64_t seed)
{
    if (records.size() < 2 || resamples < 2)
        return 0.0;
    const auto& grid = records.front().dt_grid;
    std::vector<std::size_t> idx;
    std::vector<double> wt;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] >= t_lo && grid[k] <= t_hi) {
            idx.push_back(k);
            wt.push_back(grid[k]);
        }
    }
    if (wt.size() < 2)
        return 0.0;

    const std::size_t M = records.size();
    std::vector<double> slopes(static_cast<std::size_t>(resamples));
    std::vector<std::size_t> pick(M);
    std::vector<double> y(wt.size()), v(M);
    for (int r = 0; r < resamples; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        for (auto& p : pick)
            p = static_cast<std::size_t>(rng.bits() % M);
        for (std::size_t w = 0; w < idx.size(); ++w) {
            for (std::size_t i = 0; i < M; ++i)
                v[i] = records[pick[i]].log_deviation[idx[w]];
            y[w] = which == Curve::G
                       ? std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(M)
                       : log_mean_exp(v);
        }
        slopes[static_cast<std::size_t>(r)] = fit_line(wt, y).slope;
    }
    const double m = std::accumulate(slopes.begin(), slopes.end(), 0.0) / resamples;
    double ss = 0.0;
    for (double s : slopes)
        ss += (s - m) * (s - m);
    return std::sqrt(ss / (resamples - 1));
}

VarianceRatio variance_ratio_curve(const EnsembleStats& stats, double t_lo, double t_hi,
                                   double expected_level, const VerdictPolicy& policy)
{
    VarianceRatio vr;
    vr.dt_grid = stats.dt_grid;
    vr.ratio.resize(stats.size());
    vr.t_lo = t_lo;
    vr.t_hi = t_hi;
    vr.expected = expected_level;
    std::vector<double> inside;
    for (std::size_t k = 0; k < stats.size(); ++k) {
        vr.ratio[k] = stats.sigma_G2[k] / (2.0 * stats.dt_grid[k]);
        if (stats.dt_grid[k] >= t_lo && stats.dt_grid[k] <= t_hi)
            inside.push_back(vr.ratio[k]);
    }
    if (inside.size() < 4)
        return vr;

    vr.plateau = median_of(inside);
    const std::size_t q = inside.size() / 4;
    for (std::size_t b = 0; b < 4; ++b) {
        const auto first = inside.begin() + static_cast<std::ptrdiff_t>(b * q);
        const auto last = b == 3 ? inside.end() : first + static_cast<std::ptrdiff_t>(q);
        vr.quarter_medians.push_back(median_of(std::vector<double>(first, last)));
    }
    const auto [mn, mx] = std::minmax_element(vr.quarter_medians.begin(), vr.quarter_medians.end());
    vr.drift = vr.plateau != 0.0 ? (*mx - *mn) / std::abs(vr.plateau) : 0.0;
    const auto& qm = vr.quarter_medians;
    const bool rising = qm[0] < qm[1] && qm[1] < qm[2] && qm[2] < qm[3];
    const bool falling = qm[0] > qm[1] && qm[1] > qm[2] && qm[2] > qm[3];
    vr.monotone = rising || falling;

    const bool near_expected = expected_level > 0.0 &&
                               std::abs(vr.plateau - expected_level) <=
                                   policy.plateau_tolerance * expected_level;
    if (near_expected && vr.drift < policy.drift_limit)
        vr.verdict = Verdict::ergodic;
    else if (vr.monotone && vr.drift >= policy.drift_limit)
        vr.verdict = Verdict::not_ergodized;
    else
        vr.verdict = Verdict::inconclusive;
    return vr;
}

Estimate tau_erg_eq9(const Estimate& lambda_max, const Estimate& Lambda,
                     const Estimate& var_dlambda)
{
    if (!(var_dlambda.value > 0.0))
        throw std::invalid_argument("tau_erg_eq9: <dlambda^2> must be > 0");
    const double diff = Lambda.value - lambda_max.value;
    const double v = var_dlambda.value;
    Estimate e;
    e.value = diff / v;
    const double d_diff2 = Lambda.error * Lambda.error + lambda_max.error * lambda_max.error;
    const double d_v = diff / (v * v) * var_dlambda.error;
    e.error = std::sqrt(d_diff2 / (v * v) + d_v * d_v);
    return e;
}

double var_empirical_eq10(double lambda_max, int n_nn)
{
    if (n_nn < 1)
        throw std::invalid_argument("var_empirical_eq10: N_nn must be >= 1");
    const double r = 2.0 * lambda_max / n_nn;
    return r * r;
}

double tau_erg_eq11(double lambda_max, double Lambda, int n_nn)
{
    if (!(lambda_max > 0.0))
        throw std::invalid_argument("tau_erg_eq11: lambda_max must be > 0");
    return (Lambda - lambda_max) * n_nn * n_nn / (4.0 * lambda_max * lambda_max);
}

AndersonWeissResult anderson_weiss_check(const StretchSeries& series, double t,
                                         const PhiIntegral& integral)
{
    const auto& r = series.rates;
    const auto w = static_cast<std::size_t>(std::llround(t / series.dt_r));
    if (w < 1)
        throw std::invalid_argument("anderson_weiss_check: window shorter than dt_r");
    const std::size_t n_win = r.size() / w;
    if (n_win < 2)
        throw std::invalid_argument("anderson_weiss_check: series shorter than two windows");

    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    std::vector<double> y(n_win);
    for (std::size_t k = 0; k < n_win; ++k) {
        double s = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i)
            s += r[i] - mean;
        y[k] = s * series.dt_r;
    }
    const double t_eff = static_cast<double>(w) * series.dt_r;

    AndersonWeissResult out;
    out.windows = n_win;
    out.few_windows = n_win < 100;
    out.lhs = log_mean_exp(y) / t_eff;
    const double top = *std::max_element(y.begin(), y.end());
    double se = 0.0, se2 = 0.0;
    for (double x : y) {
        const double e = std::exp(x - top);
        se += e;
        se2 += e * e;
    }
    const double nd = static_cast<double>(n_win);
    const double mean_e = se / nd;
    const double var_e = std::max(0.0, (se2 / nd - mean_e * mean_e) * nd / (nd - 1.0));
    out.lhs_error = std::sqrt(var_e / nd) / mean_e / t_eff;

    out.rhs = integral.integral;
    out.constant_c = std::exp(-integral.first_moment);
    out.rhs_finite = out.rhs - integral.first_moment / t_eff;
    return out;
}

AndersonWeissResult anderson_weiss_check(const StretchSeries& series, double t, int max_lag)
{
    const bool constant = std::all_of(series.rates.begin(), series.rates.end(),
                                      [&](double x) { return x == series.rates.front(); });
    if (constant) {
        // No fluctuations: phi vanishes identically and both sides are zero.
        return anderson_weiss_check(series, t, PhiIntegral{});
    }
    return anderson_weiss_check(series, t, tau_erg_eq4(autocorrelation(series, max_lag)));
}

std::vector<MomentCheck> gaussianity_check(const std::vector<EchoRecord>& records,
                                           const std::vector<double>& dt_values)
{
    if (records.size() < 50)
        throw std::invalid_argument("gaussianity_check: need at least 50 records");
    const auto& grid = records.front().dt_grid;
    const double n = static_cast<double>(records.size());
    const double ses = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));
    const double sek = 2.0 * ses * std::sqrt((n * n - 1.0) / ((n - 3.0) * (n + 5.0)));

    std::vector<MomentCheck> out;
    for (double target : dt_values) {
        const auto it = std::min_element(grid.begin(), grid.end(), [&](double a, double b) {
            return std::abs(a - target) < std::abs(b - target);
        });
        const auto k = static_cast<std::size_t>(it - grid.begin());
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records)
            v.push_back(r.log_deviation.at(k));

        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double x : v) {
            const double d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;

        MomentCheck mc;
        mc.dt = grid[k];
        mc.n = v.size();
        mc.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
        mc.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
        mc.skewness_error = ses;
        mc.kurtosis_error = sek;
        mc.non_gaussian = std::abs(mc.skewness) > 3.0 * ses ||
                          std::abs(mc.excess_kurtosis) > 3.0 * sek;
        out.push_back(mc);
    }
    return out;
}

ErgodizationReport build_report(const std::string& label, std::size_t sites, int n_nn,
                                const EnsembleStats& stats, const FitResult& fit_g,
                                const FitResult& fit_w, const LyapunovSummary& direct,
                                const VerdictPolicy& policy)
{
    ErgodizationReport rep;
    rep.label = label;
    rep.sites = sites;
    rep.n_nn = n_nn;
    rep.lambda_max_echo = {fit_g.slope, fit_g.slope_error};
    rep.Lambda = {fit_w.slope, fit_w.slope_error};
    rep.lambda_max_direct = direct.lambda_max;
    rep.var_dlambda_direct = direct.var_dlambda;
    // The empirical variance scales with the directly measured exponent; the
    // difference Lambda - lambda_max comes from one echo ensemble so that
    // correlated fit errors cancel.
    rep.var_dlambda_empirical = var_empirical_eq10(rep.lambda_max_direct.value, n_nn);
    rep.tau_erg_eq4 = direct.tau_erg_eq4;
    rep.tau_erg_eq9 = tau_erg_eq9(rep.lambda_max_echo, rep.Lambda, rep.var_dlambda_direct);
    rep.tau_erg_eq11 =
        (rep.Lambda.value - rep.lambda_max_echo.value) / rep.var_dlambda_empirical;
    rep.plateau_expected = rep.Lambda.value - rep.lambda_max_echo.value;
    const VarianceRatio vr =
        variance_ratio_curve(stats, fit_g.t_lo, fit_g.t_hi, rep.plateau_expected, policy);
    rep.plateau_level = vr.plateau;
    rep.verdict = vr.verdict;
    return rep;
}

}  // namespace ergochron
