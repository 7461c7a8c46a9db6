// Command-line front end: simulation, single-series analysis, and Monte
// Carlo experiment orchestration. Every subcommand is a thin adapter over
// the library; results match direct library calls exactly.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arband/arband.hpp"

namespace {

using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numeric = 3;

struct output_options {
    bool as_json = false;
};

arband::innovation_law law_from_flags(const std::string& law, int df) {
    if (law == "gaussian") return arband::innovation_law::gaussian();
    if (law == "student_t") return arband::innovation_law::student_t(df);
    if (law == "uniform") return arband::innovation_law::uniform();
    throw arband::domain_error("unknown innovation law: " + law);
}

arband::ar_model model_from_flags(std::vector<double> theta, int order, double sigma2,
                                  const std::string& law, int df) {
    if (order < static_cast<int>(theta.size()))
        throw arband::domain_error("--order is smaller than the number of --theta values");
    if (order > static_cast<int>(theta.size())) theta.resize(static_cast<std::size_t>(order), 0.0);
    return arband::ar_model(std::move(theta), sigma2, law_from_flags(law, df));
}

json selection_to_json(const arband::selection_result& r) {
    json j;
    j["name"] = r.name;
    j["chosen"] = r.chosen;
    if (!r.scores.empty()) j["scores"] = r.scores;
    if (r.threshold) j["z_n"] = *r.threshold;
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

void emit(const json& j, const output_options& opt, const std::string& human) {
    if (opt.as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << human;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::vector<double>& theta, int order, double sigma2, int n, int burn_in,
                 std::uint64_t seed, const std::string& law, int df, const std::string& out_path) {
    const arband::ar_model model = model_from_flags(theta, order, sigma2, law, df);
    const arband::time_series series = arband::simulate(model, n, burn_in, seed);
    arband::write_series_csv(out_path, series);
    std::cout << "wrote " << series.n() << " observations to " << out_path << "\n";
    return exit_ok;
}

int cmd_fit(const std::string& input, int d_n, bool center, bool divisor_n_minus_h,
            const output_options& opt) {
    const arband::time_series series = arband::read_series_csv(input, center);
    const arband::acov_divisor div =
        divisor_n_minus_h ? arband::acov_divisor::n_minus_h : arband::acov_divisor::n;
    const arband::fit_result f = arband::fit(series, d_n, false, div);
    const arband::yw_fit& top = f.fits.at(d_n);

    json j;
    j["n"] = series.n();
    j["dn"] = d_n;
    j["phi0"] = f.fits.phi0;
    j["sigma2_by_order"] = json::array();
    j["reflection"] = top.reflection;
    for (int m = 0; m <= d_n; ++m) j["sigma2_by_order"].push_back(f.fits.at(m).sigma2_hat);
    j["coeffs"] = top.coeffs;
    j["inverse_diagonal"] = f.inv.diag;

    std::ostringstream os;
    os << "n = " << series.n() << ", d_n = " << d_n << ", phi_hat_0 = " << f.fits.phi0 << "\n";
    os << "order m : sigma2_hat(m), reflection k_m\n";
    for (int m = 0; m <= d_n; ++m) {
        os << "  " << m << " : " << f.fits.at(m).sigma2_hat;
        if (m >= 1) os << ", " << top.reflection[static_cast<std::size_t>(m - 1)];
        os << "\n";
    }
    os << "coefficients at d_n:";
    for (double c : top.coeffs) os << " " << c;
    os << "\ninverse diagonal:";
    for (double g : f.inv.diag) os << " " << g;
    os << "\n";
    emit(j, opt, os.str());
    return exit_ok;
}

int cmd_select(const std::string& input, int d_n, double threshold, bool has_threshold,
               const std::vector<std::string>& estimators, bool center, const output_options& opt) {
    const arband::time_series series = arband::read_series_csv(input, center);
    const int n = series.n();
    const double t = has_threshold ? threshold : arband::threshold_schedule_y(n);
    const double z_n = arband::z_from_threshold(t, d_n);

    const arband::autocov_sequence acov = arband::sample_autocovariance(series, d_n);
    const arband::sequential_fits fits = arband::levinson_durbin(acov, d_n);
    const arband::inverse_diagonal inv = arband::toeplitz_inverse_diagonal(acov, d_n);
    const arband::max_stats stats = arband::max_statistics(fits, inv, n);
    const arband::sequential_inverse_diagonals diags =
        arband::all_order_inverse_diagonals(acov, d_n);
    const arband::selection_result q5 =
        arband::q_hat_5_precomputed(fits, diags, n, z_n, "qhat5");

    std::vector<arband::selection_result> results;
    for (const std::string& name : estimators) {
        if (name == "qhat1") results.push_back(arband::q_hat_1(stats, z_n));
        else if (name == "qhat2") results.push_back(arband::q_hat_2(stats, z_n));
        else if (name == "qhat3") results.push_back(arband::q_hat_3(stats, z_n));
        else if (name == "qhat5") results.push_back(q5);
        else {
            const bool star = name.size() > 1 && name.back() == '*';
            const std::string base = star ? name.substr(0, name.size() - 1) : name;
            arband::criterion_spec crit;
            if (base == "aic") crit = arband::criterion_spec::aic();
            else if (base == "bic" || base == "sic") crit = arband::criterion_spec::bic();
            else if (base == "mic") crit = arband::criterion_spec::mic();
            else if (base == "hqc") crit = arband::criterion_spec::hqc();
            else throw arband::domain_error("unknown estimator: " + name);
            arband::selection_result r =
                arband::select_by_criterion(arband::criterion_scores(fits, crit, n), crit.name());
            if (star) r = arband::modified_select(r, q5);
            results.push_back(std::move(r));
        }
    }

    json j;
    j["n"] = n;
    j["dn"] = d_n;
    j["threshold"] = t;
    j["z_n"] = z_n;
    j["selections"] = json::array();
    for (const auto& r : results) j["selections"].push_back(selection_to_json(r));

    std::ostringstream os;
    os << "n = " << n << ", d_n = " << d_n << ", threshold = " << t << " (z_n = " << z_n << ")\n";
    for (const auto& r : results) {
        os << "  " << r.name << ": " << r.chosen << "\n";
        for (const auto& w : r.warnings) os << "    warning: " << w << "\n";
    }
    emit(j, opt, os.str());
    return exit_ok;
}

int cmd_bands(const std::string& input, int d_n, double level, const std::string& mode_name,
              long mc_samples, std::uint64_t seed, bool center, const std::string& bn_name,
              const output_options& opt) {
    const arband::time_series series = arband::read_series_csv(input, center);
    const arband::quantile_mode mode = arband::quantile_mode_from_name(mode_name);
    const arband::bn_variant variant = arband::bn_variant_from_name(bn_name);
    const bool keep_full = mode == arband::quantile_mode::mc_correlated;
    const arband::fit_result f = arband::fit(series, d_n, keep_full);
    const arband::band_result band =
        arband::confidence_band(f.fits, f.inv, series.n(), level, mode, mc_samples, seed, variant);

    json j;
    j["n"] = series.n();
    j["dn"] = d_n;
    j["level"] = band.level;
    j["mode"] = arband::quantile_mode_name(band.mode);
    j["threshold"] = band.threshold;
    j["p_value_note"] = "gumbel-based p-values are asymptotic";
    j["center"] = band.center;
    j["half_width"] = band.half_width;

    std::ostringstream os;
    os << "simultaneous " << band.level << " band, mode " << arband::quantile_mode_name(band.mode)
       << ", max-quantile " << band.threshold << "\n";
    for (std::size_t i = 0; i < band.center.size(); ++i)
        os << "  theta_" << (i + 1) << ": " << band.center[i] << " +/- " << band.half_width[i]
           << "\n";
    emit(j, opt, os.str());
    return exit_ok;
}

int cmd_test_order(const std::string& input, int q0, int k, int d_n, double alpha, bool center,
                   const std::string& bn_name, const output_options& opt) {
    const arband::time_series series = arband::read_series_csv(input, center);
    const arband::order_test_result r = arband::order_test(series, q0, k, d_n, alpha,
                                                           arband::acov_divisor::n,
                                                           arband::bn_variant_from_name(bn_name));

    json j;
    j["q0"] = r.q0;
    j["k"] = r.k;
    j["statistic"] = r.statistic;
    j["threshold"] = r.threshold;
    j["reject"] = r.reject;
    j["p_value_gumbel_asymptotic"] = r.p_value_gumbel;

    std::ostringstream os;
    os << "H0: q <= " << r.q0 << " vs H_A: q > " << r.q0 << " (k = " << r.k << ")\n"
       << "statistic = " << r.statistic << ", threshold = " << r.threshold << " -> "
       << (r.reject ? "reject" : "do not reject") << "\n"
       << "asymptotic Gumbel p-value = " << r.p_value_gumbel << "\n";
    emit(j, opt, os.str());
    return exit_ok;
}

int cmd_experiment(const std::string& config_path, int reps_override, std::uint64_t seed_override,
                   bool has_seed_override, int workers, const std::string& out_path,
                   std::string format_name, const output_options& opt) {
    std::ifstream in(config_path);
    if (!in) throw arband::io_error("cannot open " + config_path);
    json jcfg;
    try {
        in >> jcfg;
    } catch (const json::exception& ex) {
        throw arband::config_error(config_path + ": " + ex.what());
    }
    arband::experiment_config cfg = arband::config_from_json(jcfg);
    if (reps_override > 0) cfg.repetitions = reps_override;
    if (has_seed_override) cfg.master_seed = seed_override;
    if (workers > 0) cfg.workers = workers;

    const arband::experiment_report report = arband::run_experiment(cfg);

    if (format_name.empty()) {
        if (out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json") format_name = "json";
        else if (out_path.size() > 3 && out_path.substr(out_path.size() - 3) == ".md") format_name = "markdown";
        else format_name = "csv";
    }
    arband::table_format format;
    if (format_name == "csv") format = arband::table_format::csv;
    else if (format_name == "markdown") format = arband::table_format::markdown;
    else if (format_name == "json") format = arband::table_format::json;
    else throw arband::domain_error("unknown format: " + format_name);

    const std::string table = arband::emit_table(report, format);
    if (!out_path.empty()) {
        std::ofstream outf(out_path, std::ios::binary);
        if (!outf) throw arband::io_error("cannot write " + out_path);
        outf << table;
        std::cout << "wrote report to " << out_path << "\n";
    } else if (opt.as_json && format != arband::table_format::json) {
        std::cout << arband::emit_table(report, arband::table_format::json);
    } else {
        std::cout << table;
    }
    if (!report.warnings.empty())
        std::cerr << report.warnings.size() << " repetition warning(s) recorded in the report\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yule-Walker AR estimation, order selection, and confidence bands"};
    app.require_subcommand(1);
    output_options opt;
    app.add_flag("--json", opt.as_json, "machine-readable JSON on stdout");

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate an AR process to CSV");
    std::vector<double> theta;
    int order = -1, n = 0, burn_in = arband::default_burn_in, df = 6;
    double sigma2 = 1.0;
    std::uint64_t seed = 1;
    std::string law = "gaussian", out_path;
    sim->add_option("--theta", theta, "AR coefficients theta_1..theta_q")->delimiter(',');
    sim->add_option("--order", order, "model order (pads theta with zeros)");
    sim->add_option("--sigma2", sigma2, "innovation variance")->check(CLI::PositiveNumber);
    sim->add_option("--n", n, "sample size")->required()->check(CLI::PositiveNumber);
    sim->add_option("--burn-in", burn_in, "discarded initial observations")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--law", law, "innovation law: gaussian|student_t|uniform");
    sim->add_option("--df", df, "degrees of freedom for student_t");
    sim->add_option("--out", out_path, "output CSV path")->required();

    // fit
    auto* fitc = app.add_subcommand("fit", "sequential Yule-Walker fits");
    std::string input;
    int d_n = 0;
    bool center = false, divisor_nh = false;
    fitc->add_option("--input", input, "single-column CSV")->required();
    fitc->add_option("--dn", d_n, "maximum fit order d_n")->required()->check(CLI::PositiveNumber);
    fitc->add_flag("--center", center, "subtract the sample mean first");
    fitc->add_flag("--divisor-n-minus-h", divisor_nh, "use the (n-h)-divisor autocovariances");

    // select
    auto* sel = app.add_subcommand("select", "order selection on one series");
    std::string sel_input;
    int sel_dn = 0;
    double threshold = 0.0;
    bool sel_center = false;
    std::vector<std::string> estimators = {"aic", "aic*", "bic", "bic*", "hqc", "hqc*",
                                           "mic", "mic*", "qhat1", "qhat2", "qhat3", "qhat5"};
    sel->add_option("--input", sel_input, "single-column CSV")->required();
    sel->add_option("--dn", sel_dn, "dimension d_n")->required()->check(CLI::PositiveNumber);
    auto* thr_opt = sel->add_option("--threshold", threshold,
                                    "max-scale threshold t (default: built-in schedule)");
    sel->add_option("--estimators", estimators, "estimator names")->delimiter(',');
    sel->add_flag("--center", sel_center, "subtract the sample mean first");

    // bands
    auto* bnd = app.add_subcommand("bands", "simultaneous confidence band");
    std::string bnd_input, mode_name = "iid_exact", bnd_variant = "4pi-4";
    int bnd_dn = 0;
    double level = 0.95;
    long mc_samples = 100000;
    std::uint64_t bnd_seed = 1;
    bool bnd_center = false;
    bnd->add_option("--input", bnd_input, "single-column CSV")->required();
    bnd->add_option("--dn", bnd_dn, "dimension d_n")->required()->check(CLI::PositiveNumber);
    bnd->add_option("--level", level, "confidence level (default 0.95)");
    bnd->add_option("--mode", mode_name, "gumbel|iid_exact|mc_correlated");
    bnd->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");
    bnd->add_option("--seed", bnd_seed, "Monte Carlo seed");
    bnd->add_option("--bn-variant", bnd_variant, "b_n constant: 4pi-4|log-pi|log-4pi");
    bnd->add_flag("--center", bnd_center, "subtract the sample mean first");

    // test-order
    auto* tst = app.add_subcommand("test-order", "test H0: q <= q0");
    std::string tst_input, tst_variant = "log-pi";
    int q0 = 0, k = 1, tst_dn = 0;
    double alpha = 0.05;
    bool tst_center = false;
    tst->add_option("--input", tst_input, "single-column CSV")->required();
    tst->add_option("--q0", q0, "hypothesized upper bound")->required();
    tst->add_option("--k", k, "offset (default 1)");
    tst->add_option("--dn", tst_dn, "dimension d_n")->required()->check(CLI::PositiveNumber);
    tst->add_option("--alpha", alpha, "test level (default 0.05)");
    tst->add_option("--bn-variant", tst_variant, "b_n constant: 4pi-4|log-pi|log-4pi");
    tst->add_flag("--center", tst_center, "subtract the sample mean first");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment from JSON config");
    std::string cfg_path, exp_out, exp_format;
    int reps_override = 0, workers = 0;
    std::uint64_t exp_seed = 0;
    exp->add_option("--config", cfg_path, "experiment config JSON")->required();
    exp->add_option("--reps", reps_override, "override repetition count");
    auto* seed_opt = exp->add_option("--seed", exp_seed, "override master seed");
    exp->add_option("--workers", workers, "worker threads (default: ARBAND_WORKERS or all cores)");
    exp->add_option("--out", exp_out, "output path (default stdout)");
    exp->add_option("--format", exp_format, "csv|markdown|json (default from --out extension)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(theta, order < 0 ? static_cast<int>(theta.size()) : order, sigma2,
                                n, burn_in, seed, law, df, out_path);
        if (fitc->parsed()) return cmd_fit(input, d_n, center, divisor_nh, opt);
        if (sel->parsed())
            return cmd_select(sel_input, sel_dn, threshold, thr_opt->count() > 0, estimators,
                              sel_center, opt);
        if (bnd->parsed())
            return cmd_bands(bnd_input, bnd_dn, level, mode_name, mc_samples, bnd_seed, bnd_center,
                             bnd_variant, opt);
        if (tst->parsed())
            return cmd_test_order(tst_input, q0, k, tst_dn, alpha, tst_center, tst_variant, opt);
        if (exp->parsed())
            return cmd_experiment(cfg_path, reps_override, exp_seed, seed_opt->count() > 0, workers,
                                  exp_out, exp_format, opt);
        std::cerr << "error: no subcommand\n";
        return exit_usage;
    } catch (const std::exception& ex) {
        int code = exit_numeric;
        if (dynamic_cast<const arband::io_error*>(&ex) ||
            dynamic_cast<const arband::parse_error*>(&ex) ||
            dynamic_cast<const arband::empty_series*>(&ex) ||
            dynamic_cast<const arband::lag_too_large*>(&ex) ||
            dynamic_cast<const arband::config_error*>(&ex) ||
            dynamic_cast<const arband::config_mismatch*>(&ex))
            code = exit_data;
        std::cerr << "error: " << ex.what() << "\n";
        if (opt.as_json) {
            json j;
            j["error"] = ex.what();
            j["exit_code"] = code;
            std::cout << j.dump(2) << "\n";
        }
        return code;
    }
}
