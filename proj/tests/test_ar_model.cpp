#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "arband/ar_model.hpp"
#include "arband/estimation.hpp"
#include "arband/rng.hpp"

using namespace arband;

namespace {

// Independent causality oracle: winding number of the AR polynomial
// 1 - theta_1 z - ... - theta_q z^q around the unit circle. Zero winding
// and no zero on the circle means no root in the closed unit disk.
bool causal_by_winding(const std::vector<double>& theta) {
    const int q = static_cast<int>(theta.size());
    const int grid = 1 << 14;
    auto eval = [&](double ang) {
        std::complex<double> z = std::polar(1.0, ang);
        std::complex<double> p{1.0, 0.0};
        std::complex<double> zk{1.0, 0.0};
        for (int i = 0; i < q; ++i) {
            zk *= z;
            p -= theta[static_cast<std::size_t>(i)] * zk;
        }
        return p;
    };
    double winding = 0.0;
    std::complex<double> prev = eval(0.0);
    double min_mod = std::abs(prev);
    for (int g = 1; g <= grid; ++g) {
        const std::complex<double> cur = eval(2.0 * M_PI * g / grid);
        min_mod = std::min(min_mod, std::abs(cur));
        winding += std::arg(cur / prev);
        prev = cur;
    }
    if (min_mod < 1e-7) return false;  // root (numerically) on the circle
    return std::lround(winding / (2.0 * M_PI)) == 0;
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("validate_causal basic cases") {
    CHECK(validate_causal(ar_model({0.5}, 1.0)));
    CHECK_FALSE(validate_causal(ar_model({1.0}, 1.0)));
    // the AR(6) simulation model is stationary
    CHECK(validate_causal(ar_model({0.1, -0.3, 0.05, 0.2, -0.1, 0.2}, 1.0)));
    // trailing zeros are fine
    CHECK(validate_causal(ar_model({0.5, 0.0, 0.0}, 1.0)));
    CHECK_FALSE(validate_causal(ar_model({0.0, 1.2}, 1.0)));
}

TEST_CASE("validate_causal agrees with a winding-number root search") {
    counter_rng rng(2024);
    int causal_seen = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int q = 1 + static_cast<int>(rng.next_u64() % 8);
        std::vector<double> theta(static_cast<std::size_t>(q));
        if (trial % 2 == 0) {
            // raw coefficients, frequently non-causal
            for (auto& t : theta) t = 2.4 * rng.next_unit() - 1.2;
        } else {
            // step-up from reflections, always causal
            std::vector<double> k(static_cast<std::size_t>(q));
            for (auto& kk : k) kk = 1.8 * rng.next_unit() - 0.9;
            theta = step_up_coefficients(k);
        }
        ar_model model(theta, 1.0);
        const bool fast = validate_causal(model);
        const bool oracle = causal_by_winding(theta);
        INFO("trial " << trial << " q=" << q);
        CHECK(fast == oracle);
        causal_seen += fast;
    }
    CHECK(causal_seen > 400);  // both branches exercised
}

TEST_CASE("step_up / step_down are inverses") {
    counter_rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int q = 1 + static_cast<int>(rng.next_u64() % 10);
        std::vector<double> k(static_cast<std::size_t>(q));
        for (auto& kk : k) kk = 1.9 * rng.next_unit() - 0.95;
        const auto theta = step_up_coefficients(k);
        const auto back = step_down_reflections(theta);
        REQUIRE(back.has_value());
        for (int j = 0; j < q; ++j)
            CHECK((*back)[static_cast<std::size_t>(j)] ==
                  Approx(k[static_cast<std::size_t>(j)]).margin(1e-10));
    }
}

TEST_CASE("true_autocovariance closed forms") {
    SECTION("AR(1)") {
        const auto ac = true_autocovariance(ar_model({0.5}, 1.0), 1);
        CHECK(ac[0] == Approx(4.0 / 3.0).epsilon(1e-12));
        CHECK(ac[1] == Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SECTION("white noise") {
        const auto ac = true_autocovariance(ar_model(std::vector<double>{}, 2.0), 3);
        CHECK(ac[0] == Approx(2.0));
        for (int h = 1; h <= 3; ++h) CHECK(ac[h] == Approx(0.0).margin(1e-15));
    }
    SECTION("not causal") {
        CHECK_THROWS_AS(true_autocovariance(ar_model({1.0}, 1.0), 2), not_causal);
    }
}

TEST_CASE("true_autocovariance satisfies the Yule-Walker identity") {
    counter_rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int q = static_cast<int>(rng.next_u64() % 7);
        std::vector<double> k(static_cast<std::size_t>(q));
        for (auto& kk : k) kk = 1.7 * rng.next_unit() - 0.85;
        ar_model model(step_up_coefficients(k), 0.5 + 2.0 * rng.next_unit());
        const int max_lag = q + 6;
        const auto ac = true_autocovariance(model, max_lag);
        for (int h = 0; h <= max_lag; ++h) {
            double resid = ac[h];
            for (int i = 1; i <= q; ++i)
                resid -= model.coeffs[static_cast<std::size_t>(i - 1)] * ac[std::abs(h - i)];
            if (h == 0) resid -= model.sigma2;
            CHECK(std::fabs(resid) < 1e-10 * ac[0]);
        }
    }
}

TEST_CASE("true_autocovariance matches a long simulation for AR(2)") {
    const ar_model model({0.5, -0.25}, 1.0);
    const int n = 1000000;
    const auto series = simulate(model, n, 1000, 313);
    const auto sample = sample_autocovariance(series, 2);
    const auto exact = true_autocovariance(model, 60);
    // Bartlett-style standard error from the true autocovariances
    for (int h = 0; h <= 2; ++h) {
        double var_sum = 0.0;
        for (int g = -50; g <= 50; ++g) {
            const double pg = exact[std::abs(g)];
            const double pgh1 = std::abs(g + h) <= 60 ? exact[std::abs(g + h)] : 0.0;
            const double pgh2 = std::abs(g - h) <= 60 ? exact[std::abs(g - h)] : 0.0;
            var_sum += pg * pg + pgh1 * pgh2;
        }
        const double se = std::sqrt(var_sum / n);
        CHECK(std::fabs(sample[h] - exact[h]) < 3.0 * se);
    }
}

TEST_CASE("simulate is deterministic and finite") {
    const ar_model model({0.6, -0.2}, 1.0);
    const auto a = simulate(model, 500, 1000, 12345);
    const auto b = simulate(model, 500, 1000, 12345);
    REQUIRE(a.values == b.values);  // bit-identical
    for (double v : a.values) CHECK(std::isfinite(v));
    const auto c = simulate(model, 500, 1000, 12346);
    CHECK(a.values != c.values);
}

TEST_CASE("AR(0) simulation is the raw innovation stream") {
    const ar_model model(std::vector<double>{}, 1.0);
    const int burn = 50, n = 2000;
    const auto series = simulate(model, n, burn, 777);
    innovation_sampler eps(model.law, model.sigma2, 777);
    for (int i = 0; i < burn; ++i) eps.next();
    for (int i = 0; i < n; ++i) CHECK(series.values[static_cast<std::size_t>(i)] == eps.next());

    double var = 0.0;
    for (double v : series.values) var += v * v;
    var /= n;
    CHECK(std::fabs(var - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("AR(0) empirical variance within 5 percent at n = 1e5") {
    for (auto law : {innovation_law::gaussian(), innovation_law::student_t(6),
                     innovation_law::uniform()}) {
        const ar_model model({}, 2.5, law);
        const auto series = simulate(model, 100000, 100, 4242);
        double var = 0.0;
        for (double v : series.values) var += v * v;
        var /= series.n();
        INFO(law.name());
        CHECK(var == Approx(2.5).epsilon(0.05));
        CHECK(std::fabs(sample_mean(series.values)) < 0.05);
    }
}

TEST_CASE("AR(1) theta=0.9 lag-1 autocorrelation") {
    const auto series = simulate(ar_model({0.9}, 1.0), 100000, 1000, 5);
    const auto ac = sample_autocovariance(series, 1);
    CHECK(ac[1] / ac[0] == Approx(0.9).margin(0.01));
}

TEST_CASE("simulate rejects bad input") {
    CHECK_THROWS_AS(simulate(ar_model({1.1}, 1.0), 10, 0, 1), not_causal);
    CHECK_THROWS_AS(simulate(ar_model({0.5}, 1.0), 0, 0, 1), invalid_dimension);
    CHECK_THROWS_AS(simulate(ar_model({0.5}, 1.0), 10, -1, 1), invalid_dimension);
}

TEST_CASE("student_t innovations need df > 4") {
    CHECK_THROWS_AS(innovation_law::student_t(4), domain_error);
    CHECK_NOTHROW(innovation_law::student_t(5));
}
