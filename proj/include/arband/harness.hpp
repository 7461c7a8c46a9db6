#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "arband/ar_model.hpp"
#include "arband/bands.hpp"
#include "arband/errors.hpp"
#include "arband/estimation.hpp"
#include "arband/rng.hpp"
#include "arband/selection.hpp"
#include "arband/version.hpp"

namespace arband {

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class dn_rule_kind { fixed, ceil_c_log_n, ceil_sqrt_n };

// Dimension schedule d_n(n); log-rule values are rounded up.
struct dn_rule {
    dn_rule_kind kind = dn_rule_kind::ceil_c_log_n;
    double c = 2.0;
    int fixed = 12;

    int dim_for(int n) const {
        switch (kind) {
            case dn_rule_kind::fixed: return fixed;
            case dn_rule_kind::ceil_c_log_n:
                return static_cast<int>(std::ceil(c * std::log(static_cast<double>(n))));
            case dn_rule_kind::ceil_sqrt_n:
                return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        }
        return fixed;
    }
};

// Built-in threshold schedule on the max scale: x_n = 2.71 and y_n = 3.0 for
// the small sample sizes (125, 250), x_n = 2.91 and y_n = 3.2 for the large
// ones (500, 1000). Other n use the nearer group, smaller n getting the
// smaller thresholds.
inline double threshold_schedule_x(int n) { return n < 375 ? 2.71 : 2.91; }
inline double threshold_schedule_y(int n) { return n < 375 ? 3.00 : 3.20; }

enum class threshold_ref { x, y, explicit_t };

struct estimator_spec {
    enum class kind_t { criterion, criterion_modified, qhat1, qhat2, qhat3, qhat4, qhat5 };

    kind_t kind = kind_t::criterion;
    criterion_spec crit;                       // criterion / criterion_modified
    threshold_ref threshold = threshold_ref::y;  // max-statistic estimators + modified
    double explicit_threshold = 0.0;           // when threshold == explicit_t (max scale)
    int k = 1;                                 // qhat4 only
    std::string label;
    std::string generalized_schedule;          // echo for serialization
    double generalized_c = 1.0;
};

struct experiment_config {
    ar_model model;
    std::vector<int> n_list;
    dn_rule dn;
    int repetitions = 200;
    int rep_offset = 0;
    std::uint64_t master_seed = 1;
    int burn_in = default_burn_in;
    std::vector<estimator_spec> estimators;
    std::vector<int> bucket_offsets = {-1, 0, 1};
    int workers = 0;  // 0: ARBAND_WORKERS env or hardware concurrency
    acov_divisor divisor = acov_divisor::n;
};

// ---------------------------------------------------------------------------
// JSON (de)serialization; schema documented in the repository README
// ---------------------------------------------------------------------------

namespace detail {

inline criterion_spec generalized_from_schedule(const std::string& schedule, double c) {
    if (schedule == "c_log_n")
        return criterion_spec::generalized([c](int n) { return c * std::log(static_cast<double>(n)); });
    if (schedule == "c_loglog_n")
        return criterion_spec::generalized(
            [c](int n) { return c * std::log(std::log(static_cast<double>(n))); });
    if (schedule == "constant") return criterion_spec::generalized([c](int) { return c; });
    throw config_error("unknown C_n schedule: " + schedule);
}

inline estimator_spec parse_estimator_string(const std::string& name) {
    estimator_spec e;
    auto base_of = [](const std::string& s) { return s.substr(0, s.size() - 5); };
    const bool star = name.size() > 5 && name.substr(name.size() - 5) == "_star";
    const std::string base = star ? base_of(name) : name;

    auto criterion_of = [](const std::string& s) -> std::optional<criterion_spec> {
        if (s == "aic") return criterion_spec::aic();
        if (s == "bic" || s == "sic") return criterion_spec::bic();
        if (s == "mic") return criterion_spec::mic();
        if (s == "hqc") return criterion_spec::hqc();
        return std::nullopt;
    };

    if (auto crit = criterion_of(base)) {
        e.kind = star ? estimator_spec::kind_t::criterion_modified
                      : estimator_spec::kind_t::criterion;
        e.crit = *crit;
        e.threshold = threshold_ref::y;  // the starred criteria are defined via q_hat_5 at y_n
        e.label = e.crit.name() + (star ? "*" : "");  // "sic" normalizes to "bic"
        return e;
    }

    // qhatN_x / qhatN_y
    auto qhat = [&](const std::string& prefix,
                    estimator_spec::kind_t k) -> std::optional<estimator_spec> {
        if (name == prefix + "_x" || name == prefix + "_y") {
            estimator_spec s;
            s.kind = k;
            s.threshold = (name.back() == 'x') ? threshold_ref::x : threshold_ref::y;
            s.label = name;
            return s;
        }
        return std::nullopt;
    };
    if (auto s = qhat("qhat1", estimator_spec::kind_t::qhat1)) return *s;
    if (auto s = qhat("qhat2", estimator_spec::kind_t::qhat2)) return *s;
    if (auto s = qhat("qhat3", estimator_spec::kind_t::qhat3)) return *s;
    if (auto s = qhat("qhat5", estimator_spec::kind_t::qhat5)) return *s;
    throw config_error("unknown estimator: " + name);
}

inline estimator_spec parse_estimator_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_estimator_string(j.get<std::string>());
    if (!j.is_object()) throw config_error("estimator spec must be a string or object");

    const std::string kind = j.at("kind").get<std::string>();
    estimator_spec e;
    if (kind == "generalized" || kind == "generalized_star") {
        e.kind = (kind == "generalized") ? estimator_spec::kind_t::criterion
                                         : estimator_spec::kind_t::criterion_modified;
        e.generalized_schedule = j.at("schedule").get<std::string>();
        e.generalized_c = j.value("c", 1.0);
        e.crit = generalized_from_schedule(e.generalized_schedule, e.generalized_c);
        e.label = j.value("label", std::string("gic") + (kind == "generalized" ? "" : "*"));
        e.threshold = threshold_ref::y;
        return e;
    }
    if (kind == "hqc" || kind == "hqc_star") {
        e.kind = (kind == "hqc") ? estimator_spec::kind_t::criterion
                                 : estimator_spec::kind_t::criterion_modified;
        e.crit = criterion_spec::hqc(j.value("c", 1.0));
        e.label = j.value("label", kind == "hqc" ? std::string("hqc") : std::string("hqc*"));
        e.threshold = threshold_ref::y;
        return e;
    }

    if (kind == "qhat1") e.kind = estimator_spec::kind_t::qhat1;
    else if (kind == "qhat2") e.kind = estimator_spec::kind_t::qhat2;
    else if (kind == "qhat3") e.kind = estimator_spec::kind_t::qhat3;
    else if (kind == "qhat4") e.kind = estimator_spec::kind_t::qhat4;
    else if (kind == "qhat5") e.kind = estimator_spec::kind_t::qhat5;
    else throw config_error("unknown estimator kind: " + kind);

    if (e.kind == estimator_spec::kind_t::qhat4) e.k = j.at("k").get<int>();
    if (j.contains("threshold")) {
        const auto& t = j.at("threshold");
        if (t.is_string()) {
            const std::string s = t.get<std::string>();
            if (s == "x") e.threshold = threshold_ref::x;
            else if (s == "y") e.threshold = threshold_ref::y;
            else throw config_error("threshold must be \"x\", \"y\", or a number");
        } else {
            e.threshold = threshold_ref::explicit_t;
            e.explicit_threshold = t.get<double>();
        }
    }
    if (j.contains("label")) {
        e.label = j.at("label").get<std::string>();
    } else {
        std::string suffix = (e.threshold == threshold_ref::x)   ? "_x"
                             : (e.threshold == threshold_ref::y) ? "_y"
                                                                 : "";
        e.label = kind + suffix;
        if (e.kind == estimator_spec::kind_t::qhat4) e.label += "(k=" + std::to_string(e.k) + ")";
    }
    return e;
}

inline nlohmann::json estimator_to_json(const estimator_spec& e) {
    nlohmann::json j;
    switch (e.kind) {
        case estimator_spec::kind_t::criterion:
        case estimator_spec::kind_t::criterion_modified: {
            const bool star = e.kind == estimator_spec::kind_t::criterion_modified;
            if (e.crit.kind == criterion_kind::generalized) {
                j["kind"] = star ? "generalized_star" : "generalized";
                j["schedule"] = e.generalized_schedule;
                j["c"] = e.generalized_c;
            } else if (e.crit.kind == criterion_kind::hqc && e.crit.hqc_c != 1.0) {
                j["kind"] = star ? "hqc_star" : "hqc";
                j["c"] = e.crit.hqc_c;
            } else {
                return nlohmann::json(e.crit.name() + (star ? "_star" : ""));
            }
            j["label"] = e.label;
            return j;
        }
        case estimator_spec::kind_t::qhat1: j["kind"] = "qhat1"; break;
        case estimator_spec::kind_t::qhat2: j["kind"] = "qhat2"; break;
        case estimator_spec::kind_t::qhat3: j["kind"] = "qhat3"; break;
        case estimator_spec::kind_t::qhat4:
            j["kind"] = "qhat4";
            j["k"] = e.k;
            break;
        case estimator_spec::kind_t::qhat5: j["kind"] = "qhat5"; break;
    }
    if (e.threshold == threshold_ref::x) j["threshold"] = "x";
    else if (e.threshold == threshold_ref::y) j["threshold"] = "y";
    else j["threshold"] = e.explicit_threshold;
    j["label"] = e.label;
    return j;
}

}  // namespace detail

inline experiment_config config_from_json(const nlohmann::json& j) {
    experiment_config cfg;
    try {
        const auto& jm = j.at("model");
        std::vector<double> coeffs = jm.value("coeffs", std::vector<double>{});
        const double sigma2 = jm.value("sigma2", 1.0);
        innovation_law law = innovation_law::gaussian();
        if (jm.contains("innovations")) {
            const auto& ji = jm.at("innovations");
            const std::string name = ji.at("law").get<std::string>();
            if (name == "gaussian") law = innovation_law::gaussian();
            else if (name == "student_t") law = innovation_law::student_t(ji.at("df").get<int>());
            else if (name == "uniform") law = innovation_law::uniform();
            else throw config_error("unknown innovation law: " + name);
        }
        if (jm.contains("order")) {
            const int order = jm.at("order").get<int>();
            if (order < static_cast<int>(coeffs.size()))
                throw config_error("model.order smaller than coeffs length");
            coeffs.resize(static_cast<std::size_t>(order), 0.0);
        }
        cfg.model = ar_model(std::move(coeffs), sigma2, law);

        cfg.n_list = j.at("n").get<std::vector<int>>();
        if (cfg.n_list.empty()) throw config_error("n list must be non-empty");

        const auto& jd = j.at("dn");
        const std::string rule = jd.at("rule").get<std::string>();
        if (rule == "fixed") {
            cfg.dn.kind = dn_rule_kind::fixed;
            cfg.dn.fixed = jd.at("value").get<int>();
        } else if (rule == "ceil_c_log_n") {
            cfg.dn.kind = dn_rule_kind::ceil_c_log_n;
            cfg.dn.c = jd.at("c").get<double>();
        } else if (rule == "ceil_sqrt_n") {
            cfg.dn.kind = dn_rule_kind::ceil_sqrt_n;
        } else {
            throw config_error("unknown dn rule: " + rule);
        }

        cfg.repetitions = j.value("repetitions", 200);
        cfg.rep_offset = j.value("rep_offset", 0);
        cfg.master_seed = j.value("master_seed", static_cast<std::uint64_t>(1));
        cfg.burn_in = j.value("burn_in", default_burn_in);
        cfg.workers = j.value("workers", 0);
        if (j.value("divisor", std::string("n")) == "n_minus_h") cfg.divisor = acov_divisor::n_minus_h;

        cfg.estimators.clear();
        if (j.contains("estimators")) {
            for (const auto& je : j.at("estimators"))
                cfg.estimators.push_back(detail::parse_estimator_json(je));
        } else {
            // The ten columns of the simulation tables.
            for (const char* name : {"aic", "aic_star", "bic", "bic_star", "hqc", "hqc_star",
                                     "mic", "mic_star", "qhat5_y", "qhat5_x"})
                cfg.estimators.push_back(detail::parse_estimator_string(name));
        }
        if (cfg.estimators.empty()) throw config_error("estimators list must be non-empty");
        for (std::size_t i = 0; i < cfg.estimators.size(); ++i)
            for (std::size_t k = i + 1; k < cfg.estimators.size(); ++k)
                if (cfg.estimators[i].label == cfg.estimators[k].label)
                    throw config_error("duplicate estimator label: " + cfg.estimators[i].label);

        cfg.bucket_offsets = j.value("bucket_offsets", std::vector<int>{-1, 0, 1});
    } catch (const nlohmann::json::exception& ex) {
        throw config_error(std::string("bad experiment config: ") + ex.what());
    }

    if (cfg.repetitions < 0) throw config_error("repetitions must be >= 0");
    if (cfg.rep_offset < 0) throw config_error("rep_offset must be >= 0");
    if (cfg.burn_in < 0) throw config_error("burn_in must be >= 0");
    for (std::size_t i = 1; i < cfg.bucket_offsets.size(); ++i)
        if (cfg.bucket_offsets[i] <= cfg.bucket_offsets[i - 1])
            throw config_error("bucket_offsets must be strictly increasing");
    if (cfg.bucket_offsets.empty()) throw config_error("bucket_offsets must be non-empty");
    for (int n : cfg.n_list) {
        const int d = cfg.dn.dim_for(n);
        if (d < 2) throw config_error("d_n must be >= 2 (n=" + std::to_string(n) + ")");
        if (d >= n) throw config_error("d_n must be < n (n=" + std::to_string(n) + ")");
    }
    if (!validate_causal(cfg.model)) throw config_error("model is not causal");
    return cfg;
}

inline nlohmann::json config_to_json(const experiment_config& cfg) {
    nlohmann::json j;
    nlohmann::json jm;
    jm["order"] = cfg.model.order;
    jm["coeffs"] = cfg.model.coeffs;
    jm["sigma2"] = cfg.model.sigma2;
    nlohmann::json ji;
    switch (cfg.model.law.kind) {
        case innovation_kind::gaussian: ji["law"] = "gaussian"; break;
        case innovation_kind::student_t:
            ji["law"] = "student_t";
            ji["df"] = cfg.model.law.df;
            break;
        case innovation_kind::uniform: ji["law"] = "uniform"; break;
    }
    jm["innovations"] = ji;
    j["model"] = jm;
    j["n"] = cfg.n_list;
    nlohmann::json jd;
    switch (cfg.dn.kind) {
        case dn_rule_kind::fixed:
            jd["rule"] = "fixed";
            jd["value"] = cfg.dn.fixed;
            break;
        case dn_rule_kind::ceil_c_log_n:
            jd["rule"] = "ceil_c_log_n";
            jd["c"] = cfg.dn.c;
            break;
        case dn_rule_kind::ceil_sqrt_n: jd["rule"] = "ceil_sqrt_n"; break;
    }
    j["dn"] = jd;
    j["repetitions"] = cfg.repetitions;
    j["rep_offset"] = cfg.rep_offset;
    j["master_seed"] = cfg.master_seed;
    j["burn_in"] = cfg.burn_in;
    j["divisor"] = cfg.divisor == acov_divisor::n ? "n" : "n_minus_h";
    j["estimators"] = nlohmann::json::array();
    for (const auto& e : cfg.estimators) j["estimators"].push_back(detail::estimator_to_json(e));
    j["bucket_offsets"] = cfg.bucket_offsets;
    return j;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct warning_record {
    int n_index = 0;
    int rep = 0;  // global repetition index (rep_offset applied)
    std::string estimator;
    std::string message;

    bool operator<(const warning_record& o) const {
        if (n_index != o.n_index) return n_index < o.n_index;
        if (rep != o.rep) return rep < o.rep;
        if (estimator != o.estimator) return estimator < o.estimator;
        return message < o.message;
    }
    bool operator==(const warning_record& o) const {
        return n_index == o.n_index && rep == o.rep && estimator == o.estimator &&
               message == o.message;
    }
};

struct report_cell {
    std::vector<std::uint64_t> counts;
    std::uint64_t skipped = 0;
};

struct experiment_report {
    experiment_config config;
    std::uint64_t config_hash = 0;  // over everything but repetitions/rep_offset/workers
    std::string version;
    std::vector<int> dn_per_n;
    std::vector<std::string> estimator_labels;
    std::vector<std::string> bucket_labels;
    std::vector<std::vector<report_cell>> cells;  // [n_index][estimator]
    std::vector<warning_record> warnings;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t hash_config(const experiment_config& cfg) {
    nlohmann::json j = config_to_json(cfg);
    j.erase("repetitions");
    j.erase("rep_offset");
    return fnv1a(j.dump());
}

inline std::vector<std::string> bucket_labels_for(int true_q, const std::vector<int>& offsets) {
    std::vector<std::string> labels;
    labels.reserve(offsets.size() + 2);
    labels.push_back("<" + std::to_string(true_q + offsets.front()));
    for (int o : offsets) labels.push_back(std::to_string(true_q + o));
    labels.push_back(">" + std::to_string(true_q + offsets.back()));
    return labels;
}

// Bucket of a selected order: below-range, one of the labeled offsets
// (interior gaps count toward the nearest lower label), or above-range.
inline int bucket_index(int chosen, int true_q, const std::vector<int>& offsets) {
    const int r = chosen - true_q;
    if (r < offsets.front()) return 0;
    if (r > offsets.back()) return static_cast<int>(offsets.size()) + 1;
    int i = 0;
    while (i + 1 < static_cast<int>(offsets.size()) && offsets[static_cast<std::size_t>(i) + 1] <= r) ++i;
    return i + 1;
}

struct rep_outcome {
    std::vector<int> bucket;  // per estimator; -1 = skipped
    std::vector<warning_record> warnings;
};

struct per_n_plan {
    int n = 0;
    int d_n = 0;
    double z_x = 0.0;
    double z_y = 0.0;
    bool need_stats = false;      // qhat1/2/3
    bool need_seq_diags = false;  // qhat4/qhat5/modified
    bool need_q5_x = false;
    bool need_q5_y = false;
    std::vector<double> z_explicit;  // per estimator (only meaningful when explicit)
};

inline per_n_plan make_plan(const experiment_config& cfg, int n) {
    per_n_plan p;
    p.n = n;
    p.d_n = cfg.dn.dim_for(n);
    p.z_x = z_from_threshold(threshold_schedule_x(n), p.d_n);
    p.z_y = z_from_threshold(threshold_schedule_y(n), p.d_n);
    p.z_explicit.assign(cfg.estimators.size(), 0.0);
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const estimator_spec& es = cfg.estimators[e];
        using k_t = estimator_spec::kind_t;
        if (es.kind == k_t::qhat1 || es.kind == k_t::qhat2 || es.kind == k_t::qhat3)
            p.need_stats = true;
        if (es.kind == k_t::qhat4 || es.kind == k_t::qhat5 || es.kind == k_t::criterion_modified)
            p.need_seq_diags = true;
        if (es.kind == k_t::qhat5 || es.kind == k_t::criterion_modified) {
            if (es.threshold == threshold_ref::x) p.need_q5_x = true;
            if (es.threshold == threshold_ref::y) p.need_q5_y = true;
        }
        if (es.threshold == threshold_ref::explicit_t)
            p.z_explicit[e] = z_from_threshold(es.explicit_threshold, p.d_n);
    }
    return p;
}

inline double z_for(const per_n_plan& p, const estimator_spec& es, std::size_t e_index) {
    switch (es.threshold) {
        case threshold_ref::x: return p.z_x;
        case threshold_ref::y: return p.z_y;
        case threshold_ref::explicit_t: return p.z_explicit[e_index];
    }
    return p.z_y;
}

inline rep_outcome evaluate_repetition(const experiment_config& cfg, const per_n_plan& plan,
                                       int n_index, int rep_local) {
    const int rep_global = cfg.rep_offset + rep_local;
    const std::uint64_t seed = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(n_index),
                                             static_cast<std::uint64_t>(rep_global));
    rep_outcome out;
    out.bucket.assign(cfg.estimators.size(), -1);

    const time_series series = simulate(cfg.model, plan.n, cfg.burn_in, seed);

    autocov_sequence acov;
    sequential_fits fits;
    try {
        acov = sample_autocovariance(series, plan.d_n, cfg.divisor);
        fits = levinson_durbin(acov, plan.d_n);
    } catch (const error& ex) {
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
            out.warnings.push_back(
                {n_index, rep_global, cfg.estimators[e].label, std::string("fit failed: ") + ex.what()});
        return out;
    }

    std::optional<max_stats> stats;
    if (plan.need_stats) {
        try {
            const inverse_diagonal inv = toeplitz_inverse_diagonal(acov, plan.d_n, false);
            stats = max_statistics(fits, inv, plan.n);
        } catch (const error&) {
            stats.reset();  // handled per estimator below
        }
    }

    sequential_inverse_diagonals diags;
    std::optional<selection_result> q5_x, q5_y;
    if (plan.need_seq_diags) {
        diags = all_order_inverse_diagonals(acov, plan.d_n);
        if (plan.need_q5_x) q5_x = q_hat_5_precomputed(fits, diags, plan.n, plan.z_x, "qhat5_x");
        if (plan.need_q5_y) q5_y = q_hat_5_precomputed(fits, diags, plan.n, plan.z_y, "qhat5_y");
    }

    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        const estimator_spec& es = cfg.estimators[e];
        using k_t = estimator_spec::kind_t;
        try {
            selection_result sel;
            switch (es.kind) {
                case k_t::criterion:
                    sel = select_by_criterion(criterion_scores(fits, es.crit, plan.n), es.label);
                    break;
                case k_t::criterion_modified: {
                    const selection_result base =
                        select_by_criterion(criterion_scores(fits, es.crit, plan.n), es.label);
                    const selection_result* q5 = nullptr;
                    selection_result q5_local;
                    if (es.threshold == threshold_ref::x) q5 = &*q5_x;
                    else if (es.threshold == threshold_ref::y) q5 = &*q5_y;
                    else {
                        q5_local = q_hat_5_precomputed(fits, diags, plan.n, plan.z_explicit[e]);
                        q5 = &q5_local;
                    }
                    sel = modified_select(base, *q5);
                    sel.name = es.label;
                    break;
                }
                case k_t::qhat1:
                case k_t::qhat2:
                case k_t::qhat3: {
                    if (!stats)
                        throw not_positive_definite("inverse diagonal unavailable at d_n");
                    const double z = z_for(plan, es, e);
                    if (es.kind == k_t::qhat1) sel = q_hat_1(*stats, z);
                    else if (es.kind == k_t::qhat2) sel = q_hat_2(*stats, z);
                    else sel = q_hat_3(*stats, z);
                    break;
                }
                case k_t::qhat4:
                    sel = q_hat_4_precomputed(fits, diags, es.k, plan.n, z_for(plan, es, e));
                    break;
                case k_t::qhat5:
                    sel = q_hat_5_precomputed(fits, diags, plan.n, z_for(plan, es, e), es.label);
                    break;
            }
            out.bucket[e] = bucket_index(sel.chosen, cfg.model.order, cfg.bucket_offsets);
            for (const std::string& w : sel.warnings)
                out.warnings.push_back({n_index, rep_global, es.label, w});
        } catch (const error& ex) {
            out.bucket[e] = -1;
            out.warnings.push_back({n_index, rep_global, es.label, ex.what()});
        }
    }
    return out;
}

inline int resolve_workers(int configured) {
    if (configured > 0) return configured;
    if (const char* env = std::getenv("ARBAND_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

// Runs the full grid of (n, repetition) tasks. Per-repetition seeds derive
// from (master_seed, n_index, rep_offset + rep) through a fixed mixing
// function, so the report is byte-identical for any worker count and any
// scheduling order.
inline experiment_report run_experiment(const experiment_config& cfg) {
    if (cfg.repetitions < 1) throw config_error("run_experiment: repetitions must be >= 1");
    if (cfg.estimators.empty()) throw config_error("run_experiment: no estimators configured");
    if (!validate_causal(cfg.model)) throw config_error("run_experiment: model is not causal");
    for (int n : cfg.n_list)
        if (cfg.dn.dim_for(n) >= n || cfg.dn.dim_for(n) < 2)
            throw config_error("run_experiment: need 2 <= d_n < n");

    std::vector<detail::per_n_plan> plans;
    plans.reserve(cfg.n_list.size());
    for (int n : cfg.n_list) plans.push_back(detail::make_plan(cfg, n));

    const long total = static_cast<long>(cfg.n_list.size()) * cfg.repetitions;
    std::vector<detail::rep_outcome> outcomes(static_cast<std::size_t>(total));
    std::atomic<long> next{0};
    const int workers = std::min<long>(detail::resolve_workers(cfg.workers), total);

    auto run_tasks = [&]() {
        for (;;) {
            const long t = next.fetch_add(1);
            if (t >= total) break;
            const int n_index = static_cast<int>(t / cfg.repetitions);
            const int rep = static_cast<int>(t % cfg.repetitions);
            outcomes[static_cast<std::size_t>(t)] =
                detail::evaluate_repetition(cfg, plans[static_cast<std::size_t>(n_index)], n_index, rep);
        }
    };
    if (workers <= 1) {
        run_tasks();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_tasks);
        for (auto& th : pool) th.join();
    }

    experiment_report rep;
    rep.config = cfg;
    rep.config_hash = detail::hash_config(cfg);
    rep.version = version_string;
    for (const auto& p : plans) rep.dn_per_n.push_back(p.d_n);
    for (const auto& e : cfg.estimators) rep.estimator_labels.push_back(e.label);
    rep.bucket_labels = detail::bucket_labels_for(cfg.model.order, cfg.bucket_offsets);

    const std::size_t n_buckets = rep.bucket_labels.size();
    rep.cells.assign(cfg.n_list.size(),
                     std::vector<report_cell>(cfg.estimators.size(),
                                              report_cell{std::vector<std::uint64_t>(n_buckets, 0), 0}));
    for (long t = 0; t < total; ++t) {
        const std::size_t n_index = static_cast<std::size_t>(t) / cfg.repetitions;
        const detail::rep_outcome& o = outcomes[static_cast<std::size_t>(t)];
        for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
            report_cell& cell = rep.cells[n_index][e];
            if (o.bucket[e] < 0) ++cell.skipped;
            else ++cell.counts[static_cast<std::size_t>(o.bucket[e])];
        }
        rep.warnings.insert(rep.warnings.end(), o.warnings.begin(), o.warnings.end());
    }
    std::sort(rep.warnings.begin(), rep.warnings.end());
    return rep;
}

// Cell-wise merge of two runs of the same experiment over disjoint
// repetition ranges.
inline experiment_report merge_reports(const experiment_report& a, const experiment_report& b) {
    if (a.config_hash != b.config_hash)
        throw config_mismatch("merge_reports: configs differ");
    const long a_begin = a.config.rep_offset, a_end = a_begin + a.config.repetitions;
    const long b_begin = b.config.rep_offset, b_end = b_begin + b.config.repetitions;
    const bool disjoint = a.config.repetitions == 0 || b.config.repetitions == 0 ||
                          a_end <= b_begin || b_end <= a_begin;
    if (!disjoint) throw config_mismatch("merge_reports: repetition ranges overlap");
    if (a.cells.size() != b.cells.size()) throw config_mismatch("merge_reports: cell grid differs");

    experiment_report m = a;
    if (b.config.repetitions > 0 && (a.config.repetitions == 0 || b_begin < a_begin))
        m.config.rep_offset = b.config.rep_offset;
    m.config.repetitions = a.config.repetitions + b.config.repetitions;
    for (std::size_t i = 0; i < m.cells.size(); ++i)
        for (std::size_t e = 0; e < m.cells[i].size(); ++e) {
            report_cell& cell = m.cells[i][e];
            const report_cell& add = b.cells[i][e];
            if (cell.counts.size() != add.counts.size())
                throw config_mismatch("merge_reports: bucket layout differs");
            for (std::size_t k = 0; k < cell.counts.size(); ++k) cell.counts[k] += add.counts[k];
            cell.skipped += add.skipped;
        }
    m.warnings.insert(m.warnings.end(), b.warnings.begin(), b.warnings.end());
    std::sort(m.warnings.begin(), m.warnings.end());
    return m;
}

// ---------------------------------------------------------------------------
// Table emission
// ---------------------------------------------------------------------------

enum class table_format { csv, markdown, json };

namespace detail {

// Fixed column order from the simulation tables; anything else keeps its
// configured position after these.
inline int canonical_column_rank(const std::string& label) {
    static const char* order[] = {"aic",  "aic*", "bic",  "bic*",    "hqc",
                                  "hqc*", "mic",  "mic*", "qhat5_y", "qhat5_x"};
    for (int i = 0; i < 10; ++i)
        if (label == order[i]) return i;
    return 10;
}

inline std::vector<std::size_t> column_order(const std::vector<std::string>& labels) {
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return canonical_column_rank(labels[x]) < canonical_column_rank(labels[y]);
    });
    return idx;
}

inline std::string format_warning(const warning_record& w, const std::vector<int>& n_list) {
    std::ostringstream os;
    os << "n=" << n_list[static_cast<std::size_t>(w.n_index)] << " rep=" << w.rep << " estimator="
       << w.estimator << ": " << w.message;
    return os.str();
}

}  // namespace detail

inline std::string emit_table(const experiment_report& rep, table_format format) {
    const auto cols = detail::column_order(rep.estimator_labels);
    std::ostringstream os;

    switch (format) {
        case table_format::csv: {
            os << "n,dn,bucket";
            for (std::size_t c : cols) os << "," << rep.estimator_labels[c];
            os << "\n";
            for (std::size_t i = 0; i < rep.cells.size(); ++i)
                for (std::size_t bkt = 0; bkt < rep.bucket_labels.size(); ++bkt) {
                    os << rep.config.n_list[i] << "," << rep.dn_per_n[i] << ","
                       << rep.bucket_labels[bkt];
                    for (std::size_t c : cols) os << "," << rep.cells[i][c].counts[bkt];
                    os << "\n";
                }
            break;
        }
        case table_format::markdown: {
            for (std::size_t i = 0; i < rep.cells.size(); ++i) {
                os << "### n = " << rep.config.n_list[i] << ", d_n = " << rep.dn_per_n[i] << "\n\n";
                os << "| q_hat |";
                for (std::size_t c : cols) os << " " << rep.estimator_labels[c] << " |";
                os << "\n|---|";
                for (std::size_t c = 0; c < cols.size(); ++c) os << "---|";
                os << "\n";
                for (std::size_t bkt = 0; bkt < rep.bucket_labels.size(); ++bkt) {
                    os << "| " << rep.bucket_labels[bkt] << " |";
                    for (std::size_t c : cols) os << " " << rep.cells[i][c].counts[bkt] << " |";
                    os << "\n";
                }
                os << "\n";
            }
            break;
        }
        case table_format::json: {
            nlohmann::json j;
            j["version"] = rep.version;
            std::ostringstream hash_hex;
            hash_hex << std::hex << rep.config_hash;
            j["config_hash"] = hash_hex.str();
            j["config"] = config_to_json(rep.config);
            j["bucket_labels"] = rep.bucket_labels;
            j["cells"] = nlohmann::json::array();
            for (std::size_t i = 0; i < rep.cells.size(); ++i)
                for (std::size_t c : cols) {
                    nlohmann::json cell;
                    cell["n"] = rep.config.n_list[i];
                    cell["dn"] = rep.dn_per_n[i];
                    cell["estimator"] = rep.estimator_labels[c];
                    cell["counts"] = rep.cells[i][c].counts;
                    cell["skipped"] = rep.cells[i][c].skipped;
                    j["cells"].push_back(cell);
                }
            j["warnings"] = nlohmann::json::array();
            for (const auto& w : rep.warnings)
                j["warnings"].push_back(detail::format_warning(w, rep.config.n_list));
            os << j.dump(2) << "\n";
            break;
        }
    }
    return os.str();
}

}  // namespace arband
