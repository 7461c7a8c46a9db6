#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arband/errors.hpp"
#include "arband/estimation.hpp"
#include "arband/linalg.hpp"
#include "arband/rng.hpp"
#include "arband/special.hpp"

namespace arband {

// ---------------------------------------------------------------------------
// Extreme-value normalization
// ---------------------------------------------------------------------------

// Additive constant inside b_n. The default is 4*pi - 4. log_pi is the
// classical centering for maxima of absolute values of iid Gaussians and
// the variant under which the normalized max follows the Gumbel law; any
// threshold stated on the max scale is invariant to the choice.
// log_four_pi is the signed-maxima analogue.
enum class bn_variant { four_pi_minus_four, log_pi, log_four_pi };

inline bn_variant bn_variant_from_name(const std::string& s) {
    if (s == "4pi-4") return bn_variant::four_pi_minus_four;
    if (s == "log-pi") return bn_variant::log_pi;
    if (s == "log-4pi") return bn_variant::log_four_pi;
    throw domain_error("unknown bn variant: " + s);
}

// a_n = (2 log d_n)^{-1/2},
// b_n = (2 log d_n)^{1/2} - (8 log d_n)^{-1/2} (log log d_n + C).
struct gumbel_constants {
    int d_n = 0;
    double a_n = 0.0;
    double b_n = 0.0;
};

inline gumbel_constants norm_constants(int d_n,
                                       bn_variant variant = bn_variant::four_pi_minus_four) {
    if (d_n < 2) throw invalid_dimension("norm_constants: d_n must be >= 2");
    constexpr double pi = 3.14159265358979323846264338328;
    const double two_log_d = 2.0 * std::log(static_cast<double>(d_n));
    double addend = 4.0 * pi - 4.0;
    if (variant == bn_variant::log_pi) addend = std::log(pi);
    else if (variant == bn_variant::log_four_pi) addend = std::log(4.0 * pi);
    gumbel_constants c;
    c.d_n = d_n;
    c.a_n = 1.0 / std::sqrt(two_log_d);
    c.b_n = std::sqrt(two_log_d) -
            (std::log(std::log(static_cast<double>(d_n))) + addend) / std::sqrt(4.0 * two_log_d);
    return c;
}

// ---------------------------------------------------------------------------
// Normalized max statistics
// ---------------------------------------------------------------------------

// Upsilon_i = a_n^{-1} ( sqrt(n) | (gamma*_{i,i} sigma2_hat(d_n))^{-1/2} theta_hat_i | - b_n ),
// i = 1..d_n, with theta_hat from the order-d_n fit. A nonzero center
// vector replaces theta_hat_i by theta_hat_i - center_i (band coverage).
struct max_stats {
    std::vector<double> values;
    gumbel_constants constants;
    int n = 0;
    double sigma2_hat = 0.0;
};

inline max_stats max_statistics(const sequential_fits& fits, const inverse_diagonal& inv, int n,
                                const std::vector<double>& center = {},
                                bn_variant variant = bn_variant::four_pi_minus_four) {
    const int d = fits.max_order;
    if (inv.order != d) throw dimension_mismatch("max_statistics: inverse diagonal order != d_n");
    if (!center.empty() && static_cast<int>(center.size()) != d)
        throw dimension_mismatch("max_statistics: center vector length != d_n");
    const yw_fit& top = fits.at(d);
    const double s2 = top.sigma2_hat;
    if (!(s2 > 0.0)) throw degenerate_error("max_statistics: sigma2_hat(d_n) <= 0", d);

    max_stats out;
    out.constants = norm_constants(d, variant);
    out.n = n;
    out.sigma2_hat = s2;
    out.values.resize(static_cast<std::size_t>(d));
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < d; ++i) {
        const double g = inv.diag[static_cast<std::size_t>(i)];
        if (!(g > 0.0)) throw degenerate_error("max_statistics: gamma*_{i,i} <= 0", i + 1);
        double dev = top.coeffs[static_cast<std::size_t>(i)];
        if (!center.empty()) dev -= center[static_cast<std::size_t>(i)];
        const double standardized = root_n * std::fabs(dev) / std::sqrt(g * s2);
        out.values[static_cast<std::size_t>(i)] = (standardized - out.constants.b_n) / out.constants.a_n;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantiles of the Gaussian max
// ---------------------------------------------------------------------------

enum class quantile_mode { gumbel, iid_exact, mc_correlated };

inline quantile_mode quantile_mode_from_name(const std::string& s) {
    if (s == "gumbel") return quantile_mode::gumbel;
    if (s == "iid_exact") return quantile_mode::iid_exact;
    if (s == "mc_correlated") return quantile_mode::mc_correlated;
    throw domain_error("unknown quantile mode: " + s);
}

inline const char* quantile_mode_name(quantile_mode m) {
    switch (m) {
        case quantile_mode::gumbel: return "gumbel";
        case quantile_mode::iid_exact: return "iid_exact";
        case quantile_mode::mc_correlated: return "mc_correlated";
    }
    return "?";
}

// 1-alpha quantile of max_{1<=i<=d} |xi_i| for a mean-zero Gaussian vector,
// on the scale of the max itself:
//   gumbel        a_n V_{1-alpha} + b_n           (limit law)
//   iid_exact     x solving (2 Phi(x) - 1)^d = 1 - alpha
//   mc_correlated empirical quantile over mc_samples draws with the given
//                 correlation (unit diagonal), deterministic per seed
inline double quantile_max_gaussian(int d, double alpha, quantile_mode mode,
                                    long mc_samples = 100000, const matrix* correlation = nullptr,
                                    std::uint64_t seed = 0) {
    if (d < 1) throw invalid_dimension("quantile_max_gaussian: d must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("quantile_max_gaussian: alpha must lie in (0,1)");
    switch (mode) {
        case quantile_mode::gumbel: {
            const gumbel_constants c = norm_constants(d);
            return c.a_n * gumbel_quantile(alpha) + c.b_n;
        }
        case quantile_mode::iid_exact: {
            const double root = std::pow(1.0 - alpha, 1.0 / d);
            return normal_quantile(0.5 * (1.0 + root));
        }
        case quantile_mode::mc_correlated: {
            if (correlation == nullptr)
                throw domain_error("quantile_max_gaussian: mc_correlated needs a correlation matrix");
            if (correlation->n_rows != d || correlation->n_cols != d)
                throw dimension_mismatch("quantile_max_gaussian: correlation must be d x d");
            if (mc_samples < 1) throw domain_error("quantile_max_gaussian: mc_samples must be >= 1");
            const matrix l = cholesky_factor(*correlation, 1e-12);

            // Per-sample substreams keep the draw sequence independent of
            // any internal parallelization or evaluation order.
            std::vector<double> maxima(static_cast<std::size_t>(mc_samples));
            std::vector<double> z(static_cast<std::size_t>(d));
            for (long s = 0; s < mc_samples; ++s) {
                counter_rng rng(derive_stream(seed, static_cast<std::uint64_t>(s)));
                for (int i = 0; i < d; ++i) z[static_cast<std::size_t>(i)] = rng.next_normal();
                double mx = 0.0;
                for (int i = 0; i < d; ++i) {
                    double v = 0.0;
                    for (int k = 0; k <= i; ++k) v += l(i, k) * z[static_cast<std::size_t>(k)];
                    mx = std::max(mx, std::fabs(v));
                }
                maxima[static_cast<std::size_t>(s)] = mx;
            }
            std::sort(maxima.begin(), maxima.end());
            long idx = static_cast<long>(std::ceil((1.0 - alpha) * mc_samples)) - 1;
            idx = std::clamp(idx, 0L, mc_samples - 1);
            return maxima[static_cast<std::size_t>(idx)];
        }
    }
    throw domain_error("quantile_max_gaussian: bad mode");
}

// Correlation of the limiting coefficient errors, from sigma2 * Gamma^{-1}
// normalized to unit diagonal (sigma2 cancels).
inline matrix error_correlation(const inverse_diagonal& inv) {
    if (!inv.full) throw domain_error("error_correlation: full inverse was not retained");
    const matrix& g = *inv.full;
    matrix c(inv.order, inv.order);
    for (int i = 0; i < inv.order; ++i)
        for (int j = 0; j < inv.order; ++j)
            c(i, j) = g(i, j) / std::sqrt(g(i, i) * g(j, j));
    return c;
}

// ---------------------------------------------------------------------------
// Simultaneous confidence band and ellipsoid
// ---------------------------------------------------------------------------

// Intervals theta_hat_i +/- w_i with w_i = T * sqrt(gamma*_{i,i} sigma2_hat(d_n) / n),
// where T is the chosen 1-alpha quantile of the Gaussian max (equivalently
// a_n V + b_n in the Gumbel parameterization).
struct band_result {
    double level = 0.0;
    quantile_mode mode = quantile_mode::iid_exact;
    double threshold = 0.0;  // T, on the max scale
    int n = 0;
    std::vector<double> center;      // theta_hat
    std::vector<double> half_width;  // w_i
};

inline band_result confidence_band(const sequential_fits& fits, const inverse_diagonal& inv, int n,
                                   double level, quantile_mode mode = quantile_mode::iid_exact,
                                   long mc_samples = 100000, std::uint64_t seed = 0,
                                   bn_variant variant = bn_variant::four_pi_minus_four) {
    if (!(level > 0.0 && level < 1.0)) throw domain_error("confidence_band: level must lie in (0,1)");
    const int d = fits.max_order;
    if (inv.order != d) throw dimension_mismatch("confidence_band: inverse diagonal order != d_n");
    const double alpha = 1.0 - level;

    double threshold = 0.0;
    if (mode == quantile_mode::mc_correlated) {
        const matrix corr = error_correlation(inv);
        threshold = quantile_max_gaussian(d, alpha, mode, mc_samples, &corr, seed);
    } else if (mode == quantile_mode::gumbel) {
        const gumbel_constants c = norm_constants(d, variant);
        threshold = c.a_n * gumbel_quantile(alpha) + c.b_n;
    } else {
        threshold = quantile_max_gaussian(d, alpha, mode);
    }
    if (!(threshold > 0.0))
        throw degenerate_band("confidence_band: nonpositive max-quantile " +
                              std::to_string(threshold) + " (a_n x + b_n <= 0)");

    const yw_fit& top = fits.at(d);
    const double s2 = top.sigma2_hat;
    if (!(s2 > 0.0)) throw degenerate_error("confidence_band: sigma2_hat(d_n) <= 0", d);

    band_result out;
    out.level = level;
    out.mode = mode;
    out.threshold = threshold;
    out.n = n;
    out.center = top.coeffs;
    out.half_width.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        out.half_width[static_cast<std::size_t>(i)] =
            threshold * std::sqrt(inv.diag[static_cast<std::size_t>(i)] * s2 / n);
    return out;
}

inline bool band_contains(const band_result& band, const std::vector<double>& theta0) {
    if (theta0.size() != band.center.size())
        throw dimension_mismatch("band_contains: theta0 length != d_n");
    for (std::size_t i = 0; i < theta0.size(); ++i)
        if (std::fabs(theta0[i] - band.center[i]) > band.half_width[i]) return false;
    return true;
}

// Classical chi-squared ellipsoid: accepts theta0 iff
// (Theta_hat - theta0)^T Gamma_hat_m (Theta_hat - theta0) <= sigma2_hat(m) chi2_{1-alpha}(m) / n.
inline bool ellipsoid_contains(const yw_fit& fit_m, const matrix& gamma_hat_m, int n,
                               const std::vector<double>& theta0, double level) {
    const int m = fit_m.order;
    if (gamma_hat_m.n_rows != m || gamma_hat_m.n_cols != m)
        throw dimension_mismatch("ellipsoid_contains: Gamma_hat must be m x m");
    if (static_cast<int>(theta0.size()) != m)
        throw dimension_mismatch("ellipsoid_contains: theta0 length != m");
    if (!(level > 0.0 && level < 1.0)) throw domain_error("ellipsoid_contains: level in (0,1)");

    std::vector<double> dev(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) dev[static_cast<std::size_t>(i)] = fit_m.coeffs[static_cast<std::size_t>(i)] - theta0[static_cast<std::size_t>(i)];
    double quad = 0.0;
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) row += gamma_hat_m(i, j) * dev[static_cast<std::size_t>(j)];
        quad += dev[static_cast<std::size_t>(i)] * row;
    }
    const double bound = fit_m.sigma2_hat * chi2_quantile(m, level) / n;
    return quad <= bound;
}

// ---------------------------------------------------------------------------
// Order hypothesis test
// ---------------------------------------------------------------------------

// H0: q <= q0 against H_A: q > q0. The statistic is the normalized max of
// the studentized coefficients over i in [q0+k, d_n]; under H0 it follows
// the Gumbel-type law asymptotically and explodes under the alternative.
struct order_test_result {
    int q0 = 0;
    int k = 1;
    double statistic = 0.0;
    double threshold = 0.0;
    bool reject = false;
    double p_value_gumbel = 1.0;  // asymptotic
};

inline order_test_result order_test_from_stats(const max_stats& stats, int q0, int k, double alpha) {
    const int d = stats.constants.d_n;
    if (q0 < 0 || k < 1 || q0 + k > d)
        throw invalid_range("order_test: need q0 >= 0, k >= 1, q0 + k <= d_n");
    double stat = -std::numeric_limits<double>::infinity();
    for (int i = q0 + k; i <= d; ++i)
        stat = std::max(stat, stats.values[static_cast<std::size_t>(i - 1)]);

    order_test_result out;
    out.q0 = q0;
    out.k = k;
    out.statistic = stat;
    out.threshold = gumbel_quantile(alpha);
    out.reject = stat > out.threshold;
    out.p_value_gumbel = -std::expm1(-std::exp(-stat));
    return out;
}

inline order_test_result order_test(const time_series& series, int q0, int k, int d_n, double alpha,
                                    acov_divisor divisor = acov_divisor::n,
                                    bn_variant variant = bn_variant::four_pi_minus_four) {
    if (q0 < 0 || k < 1 || q0 + k > d_n)
        throw invalid_range("order_test: need q0 >= 0, k >= 1, q0 + k <= d_n");
    const fit_result f = fit(series, d_n, false, divisor);
    const max_stats stats = max_statistics(f.fits, f.inv, series.n(), {}, variant);
    return order_test_from_stats(stats, q0, k, alpha);
}

}  // namespace arband
