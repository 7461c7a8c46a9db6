#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "arband/bands.hpp"
#include "arband/errors.hpp"
#include "arband/estimation.hpp"

namespace arband {

// ---------------------------------------------------------------------------
// Information criteria
// ---------------------------------------------------------------------------

enum class criterion_kind { aic, bic, mic, hqc, generalized };

// Penalized goodness-of-fit scores over m = 0..d_n:
//   AIC(m) = n log sigma2_hat(m) + 2 m
//   BIC(m) = SIC(m) = log sigma2_hat(m) + m log(n) / n
//   MIC(m) = log sigma2_hat(m) + (m/2) log(n) / n
//   HQC(m) = log sigma2_hat(m) + 2 c m log(log n) / n
//   generalized: n log sigma2_hat(m) + 2 C_n m for a caller-supplied C_n
// HQC's c defaults to 1 (the value simulated in practice, even though the
// consistency theory asks for c > 1).
struct criterion_spec {
    criterion_kind kind = criterion_kind::aic;
    double hqc_c = 1.0;
    std::function<double(int)> c_n;  // generalized only: n -> C_n

    static criterion_spec aic() { return {criterion_kind::aic, 1.0, {}}; }
    static criterion_spec bic() { return {criterion_kind::bic, 1.0, {}}; }
    static criterion_spec mic() { return {criterion_kind::mic, 1.0, {}}; }
    static criterion_spec hqc(double c = 1.0) {
        if (!(c > 0.0)) throw domain_error("hqc: c must be positive");
        return {criterion_kind::hqc, c, {}};
    }
    static criterion_spec generalized(std::function<double(int)> cn) {
        criterion_spec s{criterion_kind::generalized, 1.0, std::move(cn)};
        if (!s.c_n) throw domain_error("generalized criterion: C_n schedule required");
        return s;
    }

    std::string name() const {
        switch (kind) {
            case criterion_kind::aic: return "aic";
            case criterion_kind::bic: return "bic";
            case criterion_kind::mic: return "mic";
            case criterion_kind::hqc: return "hqc";
            case criterion_kind::generalized: return "gic";
        }
        return "?";
    }
};

inline std::vector<double> criterion_scores(const sequential_fits& fits, const criterion_spec& spec,
                                            int n) {
    const int d = fits.max_order;
    std::vector<double> scores(static_cast<std::size_t>(d) + 1);
    const double log_n = std::log(static_cast<double>(n));
    const double log_log_n = std::log(log_n);
    for (int m = 0; m <= d; ++m) {
        const double s2 = fits.at(m).sigma2_hat;
        if (!(s2 > 0.0)) throw degenerate_error("criterion_scores: sigma2_hat(m) <= 0", m);
        const double ls = std::log(s2);
        double score = 0.0;
        switch (spec.kind) {
            case criterion_kind::aic: score = n * ls + 2.0 * m; break;
            case criterion_kind::bic: score = ls + m * log_n / n; break;
            case criterion_kind::mic: score = ls + 0.5 * m * log_n / n; break;
            case criterion_kind::hqc: score = ls + 2.0 * spec.hqc_c * m * log_log_n / n; break;
            case criterion_kind::generalized: {
                const double cn = spec.c_n(n);
                if (!(cn > 0.0)) throw domain_error("generalized criterion: C_n must be positive");
                score = n * ls + 2.0 * cn * m;
                break;
            }
        }
        scores[static_cast<std::size_t>(m)] = score;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Selection results
// ---------------------------------------------------------------------------

struct selection_result {
    std::string name;
    int chosen = 0;
    std::vector<double> scores;        // criteria only
    std::optional<double> threshold;   // z_n, max-statistic estimators only
    std::vector<std::string> warnings;
};

// Smallest index attaining the minimum (ties break toward parsimony).
inline selection_result select_by_criterion(const std::vector<double>& scores,
                                            std::string name = "criterion") {
    if (scores.empty()) throw invalid_dimension("select_by_criterion: empty score vector");
    int best = 0;
    for (int m = 1; m < static_cast<int>(scores.size()); ++m)
        if (scores[static_cast<std::size_t>(m)] < scores[static_cast<std::size_t>(best)]) best = m;
    selection_result r;
    r.name = std::move(name);
    r.chosen = best;
    r.scores = scores;
    return r;
}

// ---------------------------------------------------------------------------
// Max-statistic estimators
// ---------------------------------------------------------------------------

namespace detail {

// suffix_max[q] = max_{i > q} Upsilon_i for q = 0..d (empty max = -inf).
inline std::vector<double> suffix_maxima(const std::vector<double>& v) {
    const int d = static_cast<int>(v.size());
    std::vector<double> s(static_cast<std::size_t>(d) + 1,
                          -std::numeric_limits<double>::infinity());
    for (int q = d - 1; q >= 0; --q)
        s[static_cast<std::size_t>(q)] =
            std::max(s[static_cast<std::size_t>(q) + 1], v[static_cast<std::size_t>(q)]);
    return s;
}

}  // namespace detail

// q_hat_1 = min{ q : max_{q+1 <= i <= d_n} Upsilon_i <= z_n }. The max over
// the empty range (q = d_n) is -inf, so a minimizer always exists.
inline selection_result q_hat_1(const max_stats& stats, double z_n) {
    const auto sm = detail::suffix_maxima(stats.values);
    int chosen = stats.constants.d_n;
    for (int q = 0; q <= stats.constants.d_n; ++q)
        if (sm[static_cast<std::size_t>(q)] <= z_n) {
            chosen = q;
            break;
        }
    selection_result r;
    r.name = "qhat1";
    r.chosen = chosen;
    r.threshold = z_n;
    return r;
}

// q_hat_2 = argmin_q { max_{i > q} (Upsilon_i - z_n)^+ + log(1+q) }.
inline selection_result q_hat_2(const max_stats& stats, double z_n) {
    const int d = stats.constants.d_n;
    const auto sm = detail::suffix_maxima(stats.values);
    int best = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int q = 0; q <= d; ++q) {
        const double excess = std::max(0.0, sm[static_cast<std::size_t>(q)] - z_n);
        const double obj = excess + std::log(1.0 + q);
        if (obj < best_obj) {
            best_obj = obj;
            best = q;
        }
    }
    selection_result r;
    r.name = "qhat2";
    r.chosen = best;
    r.threshold = z_n;
    return r;
}

// q_hat_3 = argmin_q { sum_{i > q} (Upsilon_i - z_n)^+ + q }.
inline selection_result q_hat_3(const max_stats& stats, double z_n) {
    const int d = stats.constants.d_n;
    std::vector<double> suffix_sum(static_cast<std::size_t>(d) + 1, 0.0);
    for (int q = d - 1; q >= 0; --q)
        suffix_sum[static_cast<std::size_t>(q)] =
            suffix_sum[static_cast<std::size_t>(q) + 1] +
            std::max(0.0, stats.values[static_cast<std::size_t>(q)] - z_n);
    int best = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int q = 0; q <= d; ++q) {
        const double obj = suffix_sum[static_cast<std::size_t>(q)] + q;
        if (obj < best_obj) {
            best_obj = obj;
            best = q;
        }
    }
    selection_result r;
    r.name = "qhat3";
    r.chosen = best;
    r.threshold = z_n;
    return r;
}

// Generic penalized family: the penalty receives the excess vector
// ((Upsilon_i - z_n)^+ zeroed for i <= q), the candidate q, and d_n. The
// family conditions (monotone in q on zero excess, divergent with a_n) are
// the caller's obligation; they cannot be checked at runtime.
using penalty_fn = std::function<double(const std::vector<double>& excess, int q, int d_n)>;

inline selection_result q_hat_family(const max_stats& stats, double z_n, const penalty_fn& f,
                                     std::string name = "qhatf") {
    const int d = stats.constants.d_n;
    std::vector<double> work(static_cast<std::size_t>(d), 0.0);
    for (int i = 1; i <= d; ++i)
        work[static_cast<std::size_t>(i - 1)] =
            std::max(0.0, stats.values[static_cast<std::size_t>(i - 1)] - z_n);
    int best = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int q = 0; q <= d; ++q) {
        if (q >= 1) work[static_cast<std::size_t>(q - 1)] = 0.0;  // indices <= q carry no excess
        const double obj = f(work, q, d);
        if (obj < best_obj) {
            best_obj = obj;
            best = q;
        }
    }
    selection_result r;
    r.name = std::move(name);
    r.chosen = best;
    r.threshold = z_n;
    return r;
}

// ---------------------------------------------------------------------------
// Sequential-fit estimators q_hat_4 / q_hat_5
// ---------------------------------------------------------------------------

namespace detail {

// min{ q : max_{q+1 <= i <= k} sqrt(n) |theta_i(k)| / sqrt(g_ii(k) s2(k)) <= t }
// with t = a_n z + b_n on the max scale; a_n, b_n stay those of d_n.
inline int qhat4_scan(const std::vector<double>& theta_k, double sigma2_k,
                      const std::vector<double>& diag_k, int n, const gumbel_constants& c,
                      double z_n) {
    const int k = static_cast<int>(theta_k.size());
    const double t = c.a_n * z_n + c.b_n;
    const double root_n = std::sqrt(static_cast<double>(n));
    int chosen = 0;
    for (int i = k; i >= 1; --i) {
        const double standardized = root_n * std::fabs(theta_k[static_cast<std::size_t>(i - 1)]) /
                                    std::sqrt(diag_k[static_cast<std::size_t>(i - 1)] * sigma2_k);
        if (standardized > t) {
            chosen = i;  // the max over {i..k} exceeds t, so q must be >= i
            break;
        }
    }
    return chosen;
}

}  // namespace detail

// Inverse diagonals of the leading k x k sample Toeplitz matrices for every
// k = 1..d_n. Orders where the factorization fails are marked not-ok and
// skipped by q_hat_5.
struct sequential_inverse_diagonals {
    int max_order = 0;
    std::vector<std::vector<double>> diag;  // index k-1 -> k entries
    std::vector<char> ok;
};

inline sequential_inverse_diagonals all_order_inverse_diagonals(const autocov_sequence& acov,
                                                                int d_n) {
    sequential_inverse_diagonals out;
    out.max_order = d_n;
    out.diag.resize(static_cast<std::size_t>(d_n));
    out.ok.assign(static_cast<std::size_t>(d_n), 1);
    for (int k = 1; k <= d_n; ++k) {
        try {
            out.diag[static_cast<std::size_t>(k - 1)] =
                toeplitz_inverse_diagonal(acov, k, false).diag;
        } catch (const not_positive_definite&) {
            out.ok[static_cast<std::size_t>(k - 1)] = 0;
        }
    }
    return out;
}

// q_hat_4(k): the q_hat_1 rule evaluated on the order-k fit. The a_n, b_n
// stay those of d_n; constants_at_k switches to the order-k constants for
// sensitivity analysis (clamped at k = 2 where the constants are defined).
inline selection_result q_hat_4_precomputed(const sequential_fits& fits,
                                            const sequential_inverse_diagonals& diags, int k,
                                            int n, double z_n, bool constants_at_k = false) {
    const int d = fits.max_order;
    if (k < 1 || k > d) throw invalid_range("q_hat_4: need 1 <= k <= d_n");
    const gumbel_constants c = norm_constants(constants_at_k ? std::max(k, 2) : d);
    selection_result r;
    r.name = "qhat4(k=" + std::to_string(k) + ")";
    r.threshold = z_n;
    if (!diags.ok[static_cast<std::size_t>(k - 1)]) {
        r.warnings.push_back("order " + std::to_string(k) + " skipped: Gamma_hat not positive definite");
        r.chosen = 0;
        return r;
    }
    const yw_fit& f = fits.at(k);
    if (!(f.sigma2_hat > 0.0)) {
        r.warnings.push_back("order " + std::to_string(k) + " skipped: sigma2_hat <= 0");
        r.chosen = 0;
        return r;
    }
    r.chosen = detail::qhat4_scan(f.coeffs, f.sigma2_hat, diags.diag[static_cast<std::size_t>(k - 1)],
                                  n, c, z_n);
    return r;
}

// q_hat_5 = max_{1 <= k <= d_n} q_hat_4(k).
inline selection_result q_hat_5_precomputed(const sequential_fits& fits,
                                            const sequential_inverse_diagonals& diags, int n,
                                            double z_n, std::string name = "qhat5",
                                            bool constants_at_k = false) {
    const int d = fits.max_order;
    const gumbel_constants c_dn = norm_constants(d);
    selection_result r;
    r.name = std::move(name);
    r.threshold = z_n;
    r.chosen = 0;
    for (int k = 1; k <= d; ++k) {
        if (!diags.ok[static_cast<std::size_t>(k - 1)]) {
            r.warnings.push_back("order " + std::to_string(k) +
                                 " skipped: Gamma_hat not positive definite");
            continue;
        }
        const yw_fit& f = fits.at(k);
        if (!(f.sigma2_hat > 0.0)) {
            r.warnings.push_back("order " + std::to_string(k) + " skipped: sigma2_hat <= 0");
            continue;
        }
        const gumbel_constants c = constants_at_k ? norm_constants(std::max(k, 2)) : c_dn;
        r.chosen = std::max(r.chosen,
                            detail::qhat4_scan(f.coeffs, f.sigma2_hat,
                                               diags.diag[static_cast<std::size_t>(k - 1)], n, c,
                                               z_n));
    }
    return r;
}

inline selection_result q_hat_4(const time_series& series, int k, double z_n, int d_n,
                                acov_divisor divisor = acov_divisor::n,
                                bool constants_at_k = false) {
    if (d_n >= series.n()) throw lag_too_large("q_hat_4: d_n must be < n");
    const autocov_sequence acov = sample_autocovariance(series, d_n, divisor);
    const sequential_fits fits = levinson_durbin(acov, d_n);
    const sequential_inverse_diagonals diags = all_order_inverse_diagonals(acov, d_n);
    return q_hat_4_precomputed(fits, diags, k, series.n(), z_n, constants_at_k);
}

inline selection_result q_hat_5(const time_series& series, int d_n, double z_n,
                                acov_divisor divisor = acov_divisor::n,
                                bool constants_at_k = false) {
    if (d_n >= series.n()) throw lag_too_large("q_hat_5: d_n must be < n");
    const autocov_sequence acov = sample_autocovariance(series, d_n, divisor);
    const sequential_fits fits = levinson_durbin(acov, d_n);
    const sequential_inverse_diagonals diags = all_order_inverse_diagonals(acov, d_n);
    return q_hat_5_precomputed(fits, diags, series.n(), z_n, "qhat5", constants_at_k);
}

// ---------------------------------------------------------------------------
// Modified criteria and threshold calibration
// ---------------------------------------------------------------------------

// AIC*(and friends): the modified criterion selects the larger of the base
// criterion's order and q_hat_5's order.
inline selection_result modified_select(const selection_result& base, const selection_result& q5) {
    selection_result r;
    r.name = base.name + "*";
    r.chosen = std::max(base.chosen, q5.chosen);
    r.threshold = q5.threshold;
    r.warnings = base.warnings;
    r.warnings.insert(r.warnings.end(), q5.warnings.begin(), q5.warnings.end());
    return r;
}

// Solves a_n z + b_n = t for z; threshold schedules state t (2.71, 3.2,
// ...) on the max scale.
inline double z_from_threshold(double t, int d_n, bn_variant variant = bn_variant::four_pi_minus_four) {
    const gumbel_constants c = norm_constants(d_n, variant);
    return (t - c.b_n) / c.a_n;
}

}  // namespace arband
