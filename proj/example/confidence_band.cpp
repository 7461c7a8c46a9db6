// Simultaneous confidence band and order test for a simulated AR(2) path.

#include <cstdio>

#include "arband/arband.hpp"

int main() {
    using namespace arband;

    const ar_model model({0.5, -0.25}, 1.0);
    const int n = 2000, d_n = 12;
    const time_series series = simulate(model, n, default_burn_in, 7);

    const fit_result f = fit(series, d_n);
    const band_result band = confidence_band(f.fits, f.inv, n, 0.95);

    std::printf("simultaneous 95%% band (iid_exact quantile %.4f):\n", band.threshold);
    for (int i = 0; i < d_n; ++i)
        std::printf("  theta_%-2d  %+8.4f +/- %6.4f\n", i + 1, band.center[static_cast<std::size_t>(i)],
                    band.half_width[static_cast<std::size_t>(i)]);

    for (int q0 : {0, 1, 2}) {
        const order_test_result t =
            order_test(series, q0, 1, d_n, 0.05, acov_divisor::n, bn_variant::log_pi);
        std::printf("H0: q <= %d: statistic %7.3f, %s (asymptotic p = %.4f)\n", q0, t.statistic,
                    t.reject ? "rejected" : "not rejected", t.p_value_gumbel);
    }
    return 0;
}
