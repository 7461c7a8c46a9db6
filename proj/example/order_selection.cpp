// Simulate a sparse AR(12) process, fit it, and compare the classical
// criteria with the max-statistic estimators on a single sample path.

#include <cstdio>
#include <vector>

#include "arband/arband.hpp"

int main() {
    using namespace arband;

    std::vector<double> theta(12, 0.0);
    theta[0] = 0.1;
    theta[2] = -0.4;
    theta[11] = 0.2;
    const ar_model model(theta, 1.0);

    const int n = 1000;
    const int d_n = 28;  // ceil(4 log n)
    const time_series series = simulate(model, n, default_burn_in, 2026);

    const autocov_sequence acov = sample_autocovariance(series, d_n);
    const sequential_fits fits = levinson_durbin(acov, d_n);
    const inverse_diagonal inv = toeplitz_inverse_diagonal(acov, d_n);
    const max_stats stats = max_statistics(fits, inv, n);

    const double z_n = z_from_threshold(3.2, d_n);
    const sequential_inverse_diagonals diags = all_order_inverse_diagonals(acov, d_n);
    const selection_result q5 = q_hat_5_precomputed(fits, diags, n, z_n);

    std::printf("true order 12, n = %d, d_n = %d, threshold 3.2 (z_n = %.3f)\n\n", n, d_n, z_n);
    for (auto spec : {criterion_spec::aic(), criterion_spec::bic(), criterion_spec::mic(),
                      criterion_spec::hqc()}) {
        const auto base = select_by_criterion(criterion_scores(fits, spec, n), spec.name());
        const auto star = modified_select(base, q5);
        std::printf("%-5s -> %2d    %-5s -> %2d\n", base.name.c_str(), base.chosen,
                    star.name.c_str(), star.chosen);
    }
    std::printf("qhat1 -> %2d\n", q_hat_1(stats, z_n).chosen);
    std::printf("qhat2 -> %2d\n", q_hat_2(stats, z_n).chosen);
    std::printf("qhat3 -> %2d\n", q_hat_3(stats, z_n).chosen);
    std::printf("qhat5 -> %2d\n", q5.chosen);
    return 0;
}
