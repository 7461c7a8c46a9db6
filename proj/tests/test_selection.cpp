#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "arband/ar_model.hpp"
#include "arband/estimation.hpp"
#include "arband/rng.hpp"
#include "arband/selection.hpp"

using namespace arband;

namespace {

sequential_fits fits_with_sigma2(const std::vector<double>& sigma2) {
    sequential_fits f;
    f.max_order = static_cast<int>(sigma2.size()) - 1;
    f.phi0 = sigma2.front();
    f.fits.resize(sigma2.size());
    for (std::size_t m = 0; m < sigma2.size(); ++m)
        f.fits[m] = yw_fit{static_cast<int>(m), {}, sigma2[m], {}};
    return f;
}

max_stats stats_with_values(std::vector<double> upsilon, int n = 1000) {
    max_stats s;
    s.constants = norm_constants(static_cast<int>(upsilon.size()));
    s.values = std::move(upsilon);
    s.n = n;
    s.sigma2_hat = 1.0;
    return s;
}

max_stats random_stats(counter_rng& rng, int d) {
    std::vector<double> u(static_cast<std::size_t>(d));
    for (auto& v : u) v = 4.0 * rng.next_normal();
    return stats_with_values(std::move(u));
}

}  // namespace

TEST_CASE("criterion_scores formulas") {
    SECTION("constant sigma2 makes every criterion pick 0") {
        const auto fits = fits_with_sigma2(std::vector<double>(13, 2.0));
        for (auto spec : {criterion_spec::aic(), criterion_spec::bic(), criterion_spec::mic(),
                          criterion_spec::hqc()}) {
            const auto scores = criterion_scores(fits, spec, 500);
            CHECK(select_by_criterion(scores).chosen == 0);
            for (std::size_t m = 1; m < scores.size(); ++m) CHECK(scores[m] > scores[m - 1]);
        }
    }
    SECTION("unit variance leaves only the penalty") {
        const auto fits = fits_with_sigma2(std::vector<double>(6, 1.0));
        const int n = 1000;
        const auto aic = criterion_scores(fits, criterion_spec::aic(), n);
        const auto bic = criterion_scores(fits, criterion_spec::bic(), n);
        const auto mic = criterion_scores(fits, criterion_spec::mic(), n);
        const auto hqc = criterion_scores(fits, criterion_spec::hqc(), n);
        for (int m = 0; m <= 5; ++m) {
            CHECK(aic[static_cast<std::size_t>(m)] == Approx(2.0 * m));
            CHECK(bic[static_cast<std::size_t>(m)] == Approx(m * std::log(1000.0) / 1000.0));
            CHECK(bic[static_cast<std::size_t>(m)] - mic[static_cast<std::size_t>(m)] ==
                  Approx(0.5 * m * std::log(1000.0) / 1000.0));
            CHECK(hqc[static_cast<std::size_t>(m)] ==
                  Approx(2.0 * m * std::log(std::log(1000.0)) / 1000.0));
        }
    }
    SECTION("generalized criterion uses the supplied schedule") {
        const auto fits = fits_with_sigma2(std::vector<double>(4, 1.0));
        const auto spec =
            criterion_spec::generalized([](int n) { return std::log(static_cast<double>(n)); });
        const auto scores = criterion_scores(fits, spec, 100);
        for (int m = 0; m <= 3; ++m)
            CHECK(scores[static_cast<std::size_t>(m)] == Approx(2.0 * std::log(100.0) * m));
    }
    SECTION("scaling sigma2 never changes the argmin") {
        counter_rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> s2(11);
            double cur = 1.0 + rng.next_unit();
            for (auto& s : s2) {
                s = cur;
                cur *= (0.85 + 0.15 * rng.next_unit());
            }
            const double scale = 0.01 + 10.0 * rng.next_unit();
            std::vector<double> scaled = s2;
            for (auto& s : scaled) s *= scale;
            for (auto spec : {criterion_spec::aic(), criterion_spec::bic(), criterion_spec::mic(),
                              criterion_spec::hqc()}) {
                const int a = select_by_criterion(criterion_scores(fits_with_sigma2(s2), spec, 250)).chosen;
                const int b =
                    select_by_criterion(criterion_scores(fits_with_sigma2(scaled), spec, 250)).chosen;
                CHECK(a == b);
            }
        }
    }
    SECTION("nonpositive sigma2 is rejected") {
        auto fits = fits_with_sigma2({1.0, 0.0});
        CHECK_THROWS_AS(criterion_scores(fits, criterion_spec::aic(), 100), degenerate_error);
    }
}

TEST_CASE("select_by_criterion tie-breaking") {
    CHECK(select_by_criterion({3.0, 1.0, 1.0, 2.0}).chosen == 1);
    CHECK(select_by_criterion({5.0, 4.0, 3.0, 2.0}).chosen == 3);
    CHECK(select_by_criterion({1.0}).chosen == 0);
    CHECK_THROWS_AS(select_by_criterion({}), invalid_dimension);
}

TEST_CASE("q_hat_1 scan") {
    CHECK(q_hat_1(stats_with_values({1.0, 0.5, -2.0}), 2.0).chosen == 0);
    CHECK(q_hat_1(stats_with_values({5.0, 1.0, 0.5}), 2.0).chosen == 1);
    CHECK(q_hat_1(stats_with_values({5.0, 4.0, 3.0}), 2.0).chosen == 3);  // empty-max convention
    CHECK(q_hat_1(stats_with_values({5.0, 4.0, 3.0}), 2.0).threshold == 2.0);
}

TEST_CASE("q_hat_2 and q_hat_3 hand evaluation") {
    const auto stats = stats_with_values({10.0, 0.0, 0.0});
    // qhat3 objectives at z=1: q=0 -> 9, q=1 -> 1, q=2 -> 2, q=3 -> 3
    CHECK(q_hat_3(stats, 1.0).chosen == 1);
    // qhat2 objectives: q=0 -> 9, q=1 -> log 2, q=2 -> log 3, q=3 -> log 4
    CHECK(q_hat_2(stats, 1.0).chosen == 1);
    // everything under the threshold collapses both to 0
    const auto low = stats_with_values({0.5, -0.2, 0.9});
    CHECK(q_hat_2(low, 1.0).chosen == 0);
    CHECK(q_hat_3(low, 1.0).chosen == 0);
}

TEST_CASE("q_hat_family reproduces qhat2 and qhat3") {
    const penalty_fn like2 = [](const std::vector<double>& excess, int q, int) {
        const double m = excess.empty() ? 0.0 : *std::max_element(excess.begin(), excess.end());
        return m + std::log(1.0 + q);
    };
    const penalty_fn like3 = [](const std::vector<double>& excess, int q, int) {
        double s = 0.0;
        for (double e : excess) s += e;
        return s + q;
    };
    counter_rng rng(19);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 14);
        const auto stats = random_stats(rng, d);
        const double z = 3.0 * rng.next_normal();
        CHECK(q_hat_family(stats, z, like2).chosen == q_hat_2(stats, z).chosen);
        CHECK(q_hat_family(stats, z, like3).chosen == q_hat_3(stats, z).chosen);
    }
    // constant excess: strict monotonicity in q forces 0
    const auto low = stats_with_values({-1.0, -1.0, -1.0, -1.0});
    CHECK(q_hat_family(low, 0.0, like2).chosen == 0);
}

TEST_CASE("q_hat_1 is monotone in the threshold") {
    counter_rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const auto stats = random_stats(rng, 2 + static_cast<int>(rng.next_u64() % 12));
        double z1 = 4.0 * rng.next_normal();
        double z2 = 4.0 * rng.next_normal();
        if (z1 > z2) std::swap(z1, z2);
        CHECK(q_hat_1(stats, z2).chosen <= q_hat_1(stats, z1).chosen);
    }
}

TEST_CASE("q_hat_4 / q_hat_5 on simulated data") {
    SECTION("qhat5 dominates qhat4 at k = d_n") {
        counter_rng rng(29);
        for (int trial = 0; trial < 25; ++trial) {
            const auto series =
                simulate(ar_model({0.4, -0.2}, 1.0), 400, 500, rng.next_u64());
            const int d = 10;
            const double z = z_from_threshold(3.0, d);
            CHECK(q_hat_5(series, d, z).chosen >= q_hat_4(series, d, z, d).chosen);
        }
    }
    SECTION("per-k constants variant") {
        const auto series = simulate(ar_model({0.4, -0.2}, 1.0), 600, 500, 91);
        const int d = 10;
        const double z = z_from_threshold(3.0, d);
        // at k = d_n both variants use the same constants
        CHECK(q_hat_4(series, d, z, d, acov_divisor::n, true).chosen ==
              q_hat_4(series, d, z, d, acov_divisor::n, false).chosen);
        // for k < d_n the per-k variant lowers the max-scale threshold
        const auto c_d = norm_constants(d);
        const auto c_5 = norm_constants(5);
        CHECK(c_5.a_n * z + c_5.b_n < c_d.a_n * z + c_d.b_n);
        CHECK_NOTHROW(q_hat_5(series, d, z, acov_divisor::n, true));
        CHECK_NOTHROW(q_hat_4(series, 1, z, d, acov_divisor::n, true));  // k=1 is clamped
    }
    SECTION("AR(0) null keeps qhat5 at zero") {
        const int reps = 200, n = 4000, d = 12;
        const double z = z_from_threshold(3.0, d);
        int zero = 0;
        for (int r = 0; r < reps; ++r) {
            const auto series = simulate(ar_model({}, 1.0), n, 500, derive_stream(83, 0, r));
            zero += q_hat_5(series, d, z).chosen == 0;
        }
        CHECK(static_cast<double>(zero) / reps >= 0.9);
    }
    SECTION("sparse AR(12) detection rate") {
        std::vector<double> theta(12, 0.0);
        theta[0] = 0.1;
        theta[2] = -0.4;
        theta[11] = 0.2;
        const ar_model model(theta, 1.0);
        const int reps = 200, n = 1000, d = 28;
        const double z = z_from_threshold(3.2, d);
        int hit = 0;
        for (int r = 0; r < reps; ++r) {
            const auto series = simulate(model, n, 1000, derive_stream(84, 0, r));
            hit += q_hat_5(series, d, z).chosen == 12;
        }
        CHECK(static_cast<double>(hit) / reps >= 0.85);
    }
}

TEST_CASE("degenerate orders are skipped with a warning") {
    const auto series = simulate(ar_model({0.4, -0.2}, 1.0), 300, 300, 15);
    const int d = 8;
    const auto ac = sample_autocovariance(series, d);
    const auto fits = levinson_durbin(ac, d);
    auto diags = all_order_inverse_diagonals(ac, d);
    diags.ok[2] = 0;  // mark order 3 as if its factorization had failed downstream

    const auto q4 = q_hat_4_precomputed(fits, diags, 3, series.n(), 2.0);
    CHECK(q4.chosen == 0);
    REQUIRE(q4.warnings.size() == 1);
    CHECK(q4.warnings[0].find("order 3") != std::string::npos);

    const auto q5 = q_hat_5_precomputed(fits, diags, series.n(), 2.0);
    REQUIRE(q5.warnings.size() == 1);
    // the remaining orders still contribute
    CHECK(q5.chosen >= 0);
    CHECK(q5.chosen <= d);
}

TEST_CASE("modified_select takes the larger order") {
    selection_result base{"bic", 4, {}, {}, {}};
    selection_result q5{"qhat5", 6, {}, 2.0, {}};
    const auto m1 = modified_select(base, q5);
    CHECK(m1.chosen == 6);
    CHECK(m1.name == "bic*");
    base.chosen = 7;
    const auto m2 = modified_select(base, q5);
    CHECK(m2.chosen == 7);
    CHECK(m2.chosen >= base.chosen);
}

TEST_CASE("selection works under heavy-tailed and bounded innovations") {
    for (auto law : {innovation_law::student_t(6), innovation_law::uniform()}) {
        const ar_model model({0.5, -0.25}, 1.0, law);
        int correct = 0;
        const int reps = 50;
        for (int r = 0; r < reps; ++r) {
            const auto series = simulate(model, 1000, 500, derive_stream(5005, 0, r));
            const auto fits = levinson_durbin(sample_autocovariance(series, 10), 10);
            correct +=
                select_by_criterion(criterion_scores(fits, criterion_spec::bic(), 1000)).chosen ==
                2;
        }
        INFO(law.name());
        CHECK(static_cast<double>(correct) / reps >= 0.7);
    }
}

TEST_CASE("z_from_threshold") {
    const auto c = norm_constants(10);
    CHECK(z_from_threshold(c.b_n, 10) == Approx(0.0).margin(1e-12));
    CHECK(z_from_threshold(2.71, 10) == Approx(5.9108).margin(1.1e-3));
    for (double t : {2.71, 2.91, 3.0, 3.2})
        for (int d : {10, 14, 25, 42}) {
            const auto cd = norm_constants(d);
            CHECK(cd.a_n * z_from_threshold(t, d) + cd.b_n == Approx(t).margin(1e-12));
        }
}
