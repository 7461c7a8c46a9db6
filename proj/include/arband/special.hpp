#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "arband/errors.hpp"

namespace arband {

// Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

namespace detail {

// Rational initial guess for the inverse normal CDF (Acklam's coefficients;
// relative error ~1e-9 on its own before refinement).
inline double normal_quantile_guess(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double u = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
               ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    if (p > 1.0 - plow) {
        const double u = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
               ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    const double u = p - 0.5;
    const double t = u * u;
    return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
           (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
}

}  // namespace detail

// Inverse standard normal CDF: polynomial initialization plus Halley
// refinement against normal_cdf.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    double x = detail::normal_quantile_guess(p);
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(x) - p;
        const double u = e * 2.5066282746310005024157652848110 * std::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x): series for x < a+1,
// continued fraction for the complement otherwise.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw domain_error("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz's algorithm for the continued fraction of Q(a,x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

}  // namespace detail

inline double chi2_cdf(double df, double x) {
    if (df <= 0.0) throw domain_error("chi2_cdf: df must be positive");
    if (x <= 0.0) return 0.0;
    return detail::gamma_p(0.5 * df, 0.5 * x);
}

// p-quantile of chi-squared with df degrees of freedom: Wilson-Hilferty
// start, Newton steps on the CDF with a bisection safeguard.
inline double chi2_quantile(double df, double p) {
    if (df <= 0.0) throw domain_error("chi2_quantile: df must be positive");
    if (!(p > 0.0 && p < 1.0)) throw domain_error("chi2_quantile: p must lie in (0,1)");

    const double z = normal_quantile(p);
    const double f = 2.0 / (9.0 * df);
    double x = df * std::pow(1.0 - f + z * std::sqrt(f), 3.0);
    if (!(x > 0.0)) x = 0.5 * df;

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
        const double cdf = chi2_cdf(df, x);
        if (cdf > p)
            hi = x;
        else
            lo = x;
        const double a = 0.5 * df;
        const double log_pdf = (a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a);
        const double pdf = std::exp(log_pdf);
        double next = x - (cdf - p) / pdf;
        if (!(next > lo && (next < hi))) next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 1e-12 * std::fabs(x)) return next;
        x = next;
    }
    return x;
}

// 1-alpha quantile of the Gumbel-type limit law exp(-e^{-z}).
inline double gumbel_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("gumbel_quantile: alpha must lie in (0,1)");
    return -std::log(-std::log1p(-alpha));
}

}  // namespace arband
