#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "arband/ar_model.hpp"
#include "arband/errors.hpp"
#include "arband/linalg.hpp"

namespace arband {

// ---------------------------------------------------------------------------
// Sample autocovariances
// ---------------------------------------------------------------------------

enum class acov_divisor { n, n_minus_h };

// phi_hat_h = (1/n) sum_{i=h+1}^{n} X_i X_{i-h}, no mean subtraction. The
// divisor-n form keeps the Toeplitz matrix positive semidefinite; the
// (n-h)-divisor variant is available but never the default.
inline autocov_sequence sample_autocovariance(const time_series& series, int max_lag,
                                              acov_divisor divisor = acov_divisor::n) {
    const int n = series.n();
    if (max_lag < 0 || max_lag >= n)
        throw lag_too_large("sample_autocovariance: need 0 <= max_lag < n, got max_lag=" +
                            std::to_string(max_lag) + ", n=" + std::to_string(n));
    autocov_sequence out;
    out.source = autocov_source::sample;
    out.values.resize(static_cast<std::size_t>(max_lag) + 1);
    const double* x = series.values.data();
    for (int h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (int i = h; i < n; ++i) s += x[i] * x[i - h];
        const double d = (divisor == acov_divisor::n) ? n : (n - h);
        out.values[static_cast<std::size_t>(h)] = s / d;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Yule-Walker fits
// ---------------------------------------------------------------------------

// One fitted order: coefficients, innovation-variance estimate
// sigma2_hat(m) = phi_hat_0 - Theta^T Phi, and the reflection coefficients
// (partial autocorrelations) k_1..k_m. The theta_0 = -1 convention is
// never stored.
struct yw_fit {
    int order = 0;
    std::vector<double> coeffs;
    double sigma2_hat = 0.0;
    std::vector<double> reflection;
};

// Fits for every order m = 0..max_order from a single Levinson pass.
struct sequential_fits {
    int max_order = 0;
    double phi0 = 0.0;
    std::vector<yw_fit> fits;  // fits[m] has order m; fits[0] is the empty fit

    const yw_fit& at(int m) const { return fits[static_cast<std::size_t>(m)]; }
};

// Diagonal of the inverse sample covariance matrix Gamma_m^{-1}; the full
// inverse is optionally kept for the ellipsoid test and correlated Monte
// Carlo quantiles.
struct inverse_diagonal {
    int order = 0;
    std::vector<double> diag;
    std::optional<matrix> full;
};

// Pivots at or below rel_pd_tol * phi0 are treated as loss of positive
// definiteness. No regularization anywhere.
constexpr double rel_pd_tol = 1e-12;

// Levinson-Durbin: solves Gamma_m Theta = Phi_m for every m = 0..max_order
// in one pass. sigma2_hat is updated multiplicatively by (1 - k_m^2).
// Throws degenerate_error naming the failing order when sigma2(m) <= 0 or
// |k_m| >= 1.
inline sequential_fits levinson_durbin(const autocov_sequence& acov, int max_order) {
    if (acov.max_lag() < max_order)
        throw invalid_dimension("levinson_durbin: autocovariances cover lags 0.." +
                                std::to_string(acov.max_lag()) + " < max_order=" +
                                std::to_string(max_order));
    const double phi0 = acov[0];
    if (!(phi0 > 0.0)) throw degenerate_error("levinson_durbin: phi_hat_0 <= 0", 0);

    sequential_fits out;
    out.max_order = max_order;
    out.phi0 = phi0;
    out.fits.resize(static_cast<std::size_t>(max_order) + 1);
    out.fits[0] = yw_fit{0, {}, phi0, {}};

    std::vector<double> theta;      // current coefficients theta_1..theta_m
    std::vector<double> reflect;    // k_1..k_m
    double sigma2 = phi0;
    for (int m = 1; m <= max_order; ++m) {
        double acc = acov[m];
        for (int j = 1; j < m; ++j) acc -= theta[static_cast<std::size_t>(j - 1)] * acov[m - j];
        const double k = acc / sigma2;
        if (!std::isfinite(k) || std::fabs(k) >= 1.0)
            throw degenerate_error("levinson_durbin: |k_" + std::to_string(m) + "| >= 1", m);

        std::vector<double> next(static_cast<std::size_t>(m));
        for (int j = 1; j < m; ++j)
            next[static_cast<std::size_t>(j - 1)] =
                theta[static_cast<std::size_t>(j - 1)] - k * theta[static_cast<std::size_t>(m - j - 1)];
        next[static_cast<std::size_t>(m - 1)] = k;
        theta = std::move(next);
        reflect.push_back(k);

        sigma2 *= (1.0 - k * k);
        if (!(sigma2 > 0.0))
            throw degenerate_error("levinson_durbin: sigma2_hat(" + std::to_string(m) + ") <= 0", m);

        out.fits[static_cast<std::size_t>(m)] = yw_fit{m, theta, sigma2, reflect};
    }
    return out;
}

namespace detail {

inline matrix toeplitz_from(const autocov_sequence& acov, int m) {
    matrix g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = acov[std::abs(i - j)];
    return g;
}

}  // namespace detail

// Dense oracle for the recursion: solves Gamma_m Theta = Phi_m by Cholesky
// factorization and recovers the reflection coefficients by step-down on
// the solution.
inline yw_fit toeplitz_solve_direct(const autocov_sequence& acov, int m) {
    if (m == 0) return yw_fit{0, {}, acov[0], {}};
    if (acov.max_lag() < m)
        throw invalid_dimension("toeplitz_solve_direct: need lags 0.." + std::to_string(m));
    const matrix gamma = detail::toeplitz_from(acov, m);
    const matrix l = cholesky_factor(gamma, rel_pd_tol * acov[0]);
    std::vector<double> phi(acov.values.begin() + 1, acov.values.begin() + 1 + m);
    std::vector<double> theta = cholesky_solve(l, phi);

    yw_fit fit;
    fit.order = m;
    fit.coeffs = theta;
    double dot = 0.0;
    for (int i = 0; i < m; ++i) dot += theta[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
    fit.sigma2_hat = acov[0] - dot;
    if (auto k = step_down_reflections(theta)) fit.reflection = std::move(*k);
    return fit;
}

// Diagonal of Gamma_m^{-1} from the dense factorization (reference path;
// O(m^3) is fine at the scales this library targets).
inline inverse_diagonal toeplitz_inverse_diagonal(const autocov_sequence& acov, int m,
                                                  bool keep_full = false) {
    if (m < 1) throw invalid_dimension("toeplitz_inverse_diagonal: m must be >= 1");
    if (acov.max_lag() < m - 1)
        throw invalid_dimension("toeplitz_inverse_diagonal: need lags 0.." + std::to_string(m - 1));
    const matrix gamma = detail::toeplitz_from(acov, m);
    const matrix l = cholesky_factor(gamma, rel_pd_tol * acov[0]);

    inverse_diagonal out;
    out.order = m;
    if (keep_full) {
        out.full = cholesky_inverse(l);
        out.diag.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) out.diag[static_cast<std::size_t>(i)] = (*out.full)(i, i);
    } else {
        const matrix w = lower_inverse(l);
        out.diag.assign(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            double v = 0.0;
            for (int k = i; k < m; ++k) v += w(k, i) * w(k, i);
            out.diag[static_cast<std::size_t>(i)] = v;
        }
    }
    return out;
}

// Closed-form inverse (gamma*_{i,j}) of the true covariance matrix Gamma_m
// of an AR(q) process, m >= q, after Galbraith & Galbraith. With the
// convention theta_0 = -1 and
//
//   alpha = min{i-1, q+i-j, m-j},   beta = max{i-1, m-j} + 1,
//
//   sigma2 * gamma*_{i,j} = sum_{r=0}^{alpha} theta_r theta_{r+j-i}
//                         - sum_{r=beta}^{q+i-j} theta_r theta_{r+j-i},  i <= j,
//
// where a sum is zero when its upper limit is below its lower limit, the
// second sum is zero unless m-q+1 <= i <= j <= q, and both are zero when
// j - i > q. Entries are symmetrized via gamma*_{j,i} = gamma*_{i,j}.
//
// The "+1" in beta matters: without it the second sum double-counts one
// product and the formula fails against the dense inverse whenever it
// activates (q < m < 2q, and on the whole matrix at m == q). With it the
// identity is exact for every m >= q, verified by fuzzing against direct
// inversion.
inline matrix exact_inverse_true(const ar_model& model, int m) {
    const int q = model.order;
    if (m < q || m < 1)
        throw invalid_dimension("exact_inverse_true: requires m >= max(model order, 1), got m=" +
                                std::to_string(m) + ", order=" + std::to_string(q));
    if (!validate_causal(model)) throw not_causal("exact_inverse_true: model is not causal");

    const auto theta = [&](int r) -> double {
        if (r == 0) return -1.0;
        if (r < 0 || r > q) return 0.0;
        return model.coeffs[static_cast<std::size_t>(r - 1)];
    };

    matrix g(m, m);
    for (int i = 1; i <= m; ++i) {
        for (int j = i; j <= m; ++j) {
            double v = 0.0;
            if (j - i <= q) {
                const int alpha = std::min({i - 1, q + i - j, m - j});
                for (int r = 0; r <= alpha; ++r) v += theta(r) * theta(r + j - i);
                if (m - q + 1 <= i && j <= q) {
                    const int beta = std::max(i - 1, m - j) + 1;
                    for (int r = beta; r <= q + i - j; ++r) v -= theta(r) * theta(r + j - i);
                }
            }
            g(i - 1, j - 1) = v / model.sigma2;
            g(j - 1, i - 1) = g(i - 1, j - 1);
        }
    }
    return g;
}

// Convenience composition: sample autocovariances, the full Levinson ladder,
// and the inverse diagonal at order d_n.
struct fit_result {
    sequential_fits fits;
    inverse_diagonal inv;
};

inline fit_result fit(const time_series& series, int d_n, bool keep_full = false,
                      acov_divisor divisor = acov_divisor::n) {
    const autocov_sequence acov = sample_autocovariance(series, d_n, divisor);
    fit_result out;
    out.fits = levinson_durbin(acov, d_n);
    out.inv = toeplitz_inverse_diagonal(acov, d_n, keep_full);
    return out;
}

}  // namespace arband
