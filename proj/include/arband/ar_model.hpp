#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arband/errors.hpp"
#include "arband/linalg.hpp"
#include "arband/rng.hpp"

namespace arband {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class innovation_kind { gaussian, student_t, uniform };

// Innovation distribution; every law is mean zero and scaled so that the
// draws have variance sigma2 exactly. student_t requires integer df > 4
// (finite fourth-plus moments).
struct innovation_law {
    innovation_kind kind = innovation_kind::gaussian;
    int df = 6;

    static innovation_law gaussian() { return {innovation_kind::gaussian, 0}; }
    static innovation_law student_t(int df) {
        if (df <= 4) throw domain_error("student_t innovations need df > 4");
        return {innovation_kind::student_t, df};
    }
    static innovation_law uniform() { return {innovation_kind::uniform, 0}; }

    std::string name() const {
        switch (kind) {
            case innovation_kind::gaussian: return "gaussian";
            case innovation_kind::student_t: return "student_t(" + std::to_string(df) + ")";
            case innovation_kind::uniform: return "uniform";
        }
        return "?";
    }
};

// True data-generating AR(q) process X_k = theta_1 X_{k-1} + ... + theta_q X_{k-q} + eps_k.
// Trailing zero coefficients are allowed: the declared order is an upper
// bound, not necessarily the minimal one.
struct ar_model {
    int order = 0;
    std::vector<double> coeffs;  // (theta_1, ..., theta_q)
    double sigma2 = 1.0;
    innovation_law law = innovation_law::gaussian();

    ar_model() = default;
    ar_model(std::vector<double> theta, double s2,
             innovation_law l = innovation_law::gaussian())
        : order(static_cast<int>(theta.size())), coeffs(std::move(theta)), sigma2(s2), law(l) {
        if (!(sigma2 > 0.0)) throw domain_error("ar_model: sigma2 must be positive");
    }
};

struct time_series {
    std::vector<double> values;
    int n() const { return static_cast<int>(values.size()); }
};

enum class autocov_source { sample, exact };

// Autocovariances (phi_0, ..., phi_H) indexed by lag.
struct autocov_sequence {
    std::vector<double> values;
    autocov_source source = autocov_source::sample;

    int max_lag() const { return static_cast<int>(values.size()) - 1; }
    double operator[](int h) const { return values[static_cast<std::size_t>(h)]; }
};

// ---------------------------------------------------------------------------
// Causality via the step-down (reverse Levinson) recursion
// ---------------------------------------------------------------------------

// Runs the step-down recursion on (theta_1,...,theta_q) and returns the
// reflection coefficients (k_1,...,k_q), or nullopt if the recursion
// degenerates (some |k_j| >= 1, or non-finite input). The AR polynomial
// 1 - theta_1 z - ... - theta_q z^q has all roots outside the closed unit
// disk exactly when every |k_j| < 1.
inline std::optional<std::vector<double>> step_down_reflections(std::vector<double> c) {
    const int q = static_cast<int>(c.size());
    std::vector<double> k(static_cast<std::size_t>(q), 0.0);
    for (int j = q; j >= 1; --j) {
        const double kj = c[static_cast<std::size_t>(j - 1)];
        if (!std::isfinite(kj) || std::fabs(kj) >= 1.0) return std::nullopt;
        k[static_cast<std::size_t>(j - 1)] = kj;
        if (j == 1) break;
        const double denom = 1.0 - kj * kj;
        std::vector<double> next(static_cast<std::size_t>(j - 1));
        for (int i = 1; i <= j - 1; ++i)
            next[static_cast<std::size_t>(i - 1)] =
                (c[static_cast<std::size_t>(i - 1)] + kj * c[static_cast<std::size_t>(j - i - 1)]) / denom;
        c = std::move(next);
    }
    return k;
}

// Inverse of step_down_reflections: builds coefficients from reflection
// coefficients. Any input with all |k_j| < 1 yields a causal model.
inline std::vector<double> step_up_coefficients(const std::vector<double>& k) {
    std::vector<double> c;
    c.reserve(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) {
        const double kj = k[j];
        std::vector<double> next(j + 1);
        for (std::size_t i = 0; i < j; ++i) next[i] = c[i] - kj * c[j - 1 - i];
        next[j] = kj;
        c = std::move(next);
    }
    return c;
}

inline bool validate_causal(const ar_model& model) {
    if (!(model.sigma2 > 0.0)) return false;
    if (static_cast<int>(model.coeffs.size()) != model.order) return false;
    return step_down_reflections(model.coeffs).has_value();
}

// ---------------------------------------------------------------------------
// Exact autocovariances
// ---------------------------------------------------------------------------

// Solves the (q+1)-dimensional Yule-Walker moment system for
// (phi_0,...,phi_q), then extends by phi_h = sum_i theta_i phi_{h-i}.
inline autocov_sequence true_autocovariance(const ar_model& model, int max_lag) {
    if (max_lag < 0) throw invalid_dimension("true_autocovariance: max_lag must be >= 0");
    if (!validate_causal(model)) throw not_causal("true_autocovariance: model is not causal");
    const int q = model.order;

    // phi_h - sum_{i=1}^q theta_i phi_{|h-i|} = sigma2 * 1{h=0},  h = 0..q
    matrix m(q + 1, q + 1);
    std::vector<double> rhs(static_cast<std::size_t>(q + 1), 0.0);
    rhs[0] = model.sigma2;
    for (int h = 0; h <= q; ++h) {
        m(h, h) += 1.0;
        for (int i = 1; i <= q; ++i) m(h, std::abs(h - i)) -= model.coeffs[static_cast<std::size_t>(i - 1)];
    }
    std::vector<double> head = gauss_solve(m, rhs);

    autocov_sequence out;
    out.source = autocov_source::exact;
    out.values.resize(static_cast<std::size_t>(max_lag) + 1);
    for (int h = 0; h <= std::min(max_lag, q); ++h) out.values[static_cast<std::size_t>(h)] = head[static_cast<std::size_t>(h)];
    for (int h = q + 1; h <= max_lag; ++h) {
        double v = 0.0;
        for (int i = 1; i <= q; ++i) v += model.coeffs[static_cast<std::size_t>(i - 1)] * out.values[static_cast<std::size_t>(h - i)];
        out.values[static_cast<std::size_t>(h)] = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

// Draws one innovation with variance sigma2 under the given law.
class innovation_sampler {
public:
    innovation_sampler(innovation_law law, double sigma2, std::uint64_t seed)
        : law_(law), rng_(seed) {
        const double sigma = std::sqrt(sigma2);
        switch (law_.kind) {
            case innovation_kind::gaussian:
                scale_ = sigma;
                break;
            case innovation_kind::student_t:
                // Var(t_df) = df/(df-2); rescale to sigma2.
                scale_ = sigma * std::sqrt((law_.df - 2.0) / law_.df);
                break;
            case innovation_kind::uniform:
                // U(-a, a) has variance a^2/3.
                scale_ = sigma * std::sqrt(3.0);
                break;
        }
    }

    double next() {
        switch (law_.kind) {
            case innovation_kind::gaussian:
                return scale_ * rng_.next_normal();
            case innovation_kind::student_t: {
                const double z = rng_.next_normal();
                double chi2 = 0.0;
                for (int i = 0; i < law_.df; ++i) {
                    const double w = rng_.next_normal();
                    chi2 += w * w;
                }
                return scale_ * z / std::sqrt(chi2 / law_.df);
            }
            case innovation_kind::uniform:
                return scale_ * (2.0 * rng_.next_unit() - 1.0);
        }
        return 0.0;
    }

private:
    innovation_law law_;
    counter_rng rng_;
    double scale_ = 1.0;
};

// Simulates burn_in + n observations from zero initial state and returns the
// last n. Bit-identical output for identical (model, n, burn_in, seed).
inline time_series simulate(const ar_model& model, int n, int burn_in, std::uint64_t seed) {
    if (n < 1) throw invalid_dimension("simulate: n must be >= 1");
    if (burn_in < 0) throw invalid_dimension("simulate: burn_in must be >= 0");
    if (!validate_causal(model)) throw not_causal("simulate: model is not causal");

    const int q = model.order;
    const int total = burn_in + n;
    innovation_sampler eps(model.law, model.sigma2, seed);

    std::vector<double> x(static_cast<std::size_t>(total));
    for (int k = 0; k < total; ++k) {
        double v = eps.next();
        const int lags = std::min(q, k);
        for (int i = 1; i <= lags; ++i) v += model.coeffs[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(k - i)];
        x[static_cast<std::size_t>(k)] = v;
    }

    time_series out;
    out.values.assign(x.begin() + burn_in, x.end());
    return out;
}

constexpr int default_burn_in = 1000;

}  // namespace arband
