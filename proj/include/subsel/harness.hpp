#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <utility>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "subsel/core.hpp"
#include "subsel/generators.hpp"
#include "subsel/rng.hpp"
#include "subsel/select.hpp"

namespace subsel {

// Regret rate exponent of the minimax theory: beta*kappa*gamma /
// (kappa*(2*beta + d) + beta*gamma).
inline double theoretical_exponent(double beta, double kappa, double gamma, int d) {
    if (!(beta > 0.0 && kappa > 0.0 && gamma > 0.0 && d >= 1))
        throw std::invalid_argument("theoretical_exponent requires positive parameters");
    return beta * kappa * gamma / (kappa * (2.0 * beta + d) + beta * gamma);
}

struct RateConfig {
    double beta;
    double kappa;
    double gamma;
    int d;
    std::vector<std::size_t> n_grid;
    std::size_t reps;
    double alpha;
    GeneratorSpec spec;
    SelectionConfig sel_cfg;
};

// The class parameters must satisfy beta*gamma*(kappa-1) <= d*kappa; a
// violation is reported as a warning, not an error.
inline std::vector<std::string> validate_rate_config(const RateConfig& rc) {
    std::vector<std::string> warnings;
    if (rc.beta * rc.gamma * (rc.kappa - 1.0) > rc.d * rc.kappa + 1e-12)
        warnings.push_back(
            "parameter constraint violated: beta*gamma*(kappa-1) > d*kappa");
    return warnings;
}

struct RateRow {
    std::size_t n;
    std::size_t reps;
    double type1_rate;
    double type1_ci_halfwidth;
    std::size_t containment_count;
    double mean_measure_given_containment;  // NaN when nothing contained
    double regret_estimate;                 // NaN when nothing contained
    bool excluded_from_fit;
};

struct ExperimentReport {
    std::vector<RateRow> rows;
    std::optional<double> slope;
    std::optional<double> slope_se;
    double theoretical_exp;
};

inline int thread_count_from_env() {
    if (const char* env = std::getenv("SUBSEL_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

struct ReplicateOutcome {
    bool contained;
    double true_measure;  // exact mu(a_hat); NaN if no measure oracle
};

// One selection run per replicate on its own RNG stream; results are collected
// in replicate order, so the aggregate does not depend on scheduling.
inline std::vector<ReplicateOutcome> run_replicates(const GeneratorSpec& spec,
                                                    const SelectionConfig& cfg,
                                                    std::size_t n, std::size_t reps,
                                                    std::uint64_t seed) {
    const GroundTruth gt = ground_truth(spec);
    std::vector<ReplicateOutcome> outcomes(reps);
    const int threads = std::min<int>(thread_count_from_env(),
                                      static_cast<int>(std::max<std::size_t>(reps, 1)));

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
            Rng rng = Rng::stream(seed, n, rep);
            const Dataset data = sample(spec, n, rng);
            const SelectionResult result = oss_select(data, cfg);
            const bool contained = gt.superlevel_contains(result.a_hat);
            double measure = std::numeric_limits<double>::quiet_NaN();
            if (gt.rect_measure)
                measure = result.a_hat.is_empty() ? 0.0 : gt.rect_measure(result.a_hat);
            outcomes[rep] = {contained, measure};
        }
    };

    if (threads <= 1) {
        worker(0, reps);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (reps + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(reps, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return outcomes;
}

// Fraction of replicates whose selected set escapes the super-level set; an
// empty selection counts as contained.
inline std::pair<double, double> estimate_type1(const GeneratorSpec& spec,
                                                const SelectionConfig& cfg,
                                                std::size_t n, std::size_t reps,
                                                std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("estimate_type1 requires reps >= 1");
    const auto outcomes = run_replicates(spec, cfg, n, reps, seed);
    std::size_t violations = 0;
    for (const auto& o : outcomes)
        if (!o.contained) ++violations;
    const double rate = static_cast<double>(violations) / static_cast<double>(reps);
    const double ci = 1.96 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
    return {rate, ci};
}

// m_tau minus the average exact measure of a_hat over contained replicates.
inline std::pair<double, std::size_t> estimate_regret(const GeneratorSpec& spec,
                                                      const SelectionConfig& cfg,
                                                      std::size_t n, std::size_t reps,
                                                      std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("estimate_regret requires reps >= 1");
    const GroundTruth gt = ground_truth(spec);
    if (!gt.m_tau.has_value())
        throw std::runtime_error("estimate_regret: m_tau unknown for this generator");
    if (!gt.rect_measure)
        throw std::runtime_error(
            "estimate_regret: no exact rectangle-measure oracle for this generator");
    const auto outcomes = run_replicates(spec, cfg, n, reps, seed);
    double sum = 0.0;
    std::size_t contained = 0;
    for (const auto& o : outcomes) {
        if (!o.contained) continue;
        ++contained;
        sum += o.true_measure;
    }
    if (contained == 0)
        throw std::runtime_error("estimate_regret: no conditional sample");
    return {*gt.m_tau - sum / static_cast<double>(contained), contained};
}

namespace detail {

struct SlopeFit {
    double slope;
    double se;
};

inline std::optional<SlopeFit> fit_log_slope(const std::vector<double>& log_n,
                                             const std::vector<double>& log_r) {
    const std::size_t k = log_n.size();
    if (k < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += log_n[i];
        my += log_r[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (log_n[i] - mx) * (log_n[i] - mx);
        sxy += (log_n[i] - mx) * (log_r[i] - my);
    }
    if (sxx == 0.0) return std::nullopt;
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double fit = my + slope * (log_n[i] - mx);
        ssr += (log_r[i] - fit) * (log_r[i] - fit);
    }
    const double se =
        k > 2 ? std::sqrt(ssr / static_cast<double>(k - 2) / sxx) : 0.0;
    return SlopeFit{slope, se};
}

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Full sweep over the sample-size grid: Type I rate and regret per n, plus an
// OLS fit of log(regret) on log(n). Rows with no contained replicate or with a
// non-positive regret estimate are marked and left out of the fit.
inline ExperimentReport rate_study(const RateConfig& rc) {
    if (rc.n_grid.size() < 3)
        throw std::invalid_argument("rate_study requires an n_grid of length >= 3");
    if (!std::is_sorted(rc.n_grid.begin(), rc.n_grid.end()))
        throw std::invalid_argument("rate_study requires an ascending n_grid");
    const GroundTruth gt = ground_truth(rc.spec);
    if (!gt.m_tau.has_value())
        throw std::runtime_error("rate_study: m_tau unknown for this generator");
    if (!gt.rect_measure)
        throw std::runtime_error("rate_study: no exact measure oracle for this generator");

    ExperimentReport report;
    report.theoretical_exp = theoretical_exponent(rc.beta, rc.kappa, rc.gamma, rc.d);
    std::vector<double> log_n, log_r;
    for (const std::size_t n : rc.n_grid) {
        const auto outcomes = run_replicates(rc.spec, rc.sel_cfg, n, rc.reps, rc.spec.seed);
        std::size_t violations = 0, contained = 0;
        double sum_measure = 0.0;
        for (const auto& o : outcomes) {
            if (!o.contained) {
                ++violations;
                continue;
            }
            ++contained;
            sum_measure += o.true_measure;
        }
        RateRow row;
        row.n = n;
        row.reps = rc.reps;
        row.type1_rate = static_cast<double>(violations) / static_cast<double>(rc.reps);
        row.type1_ci_halfwidth =
            1.96 * std::sqrt(row.type1_rate * (1.0 - row.type1_rate) /
                             static_cast<double>(rc.reps));
        row.containment_count = contained;
        if (contained > 0) {
            row.mean_measure_given_containment =
                sum_measure / static_cast<double>(contained);
            row.regret_estimate = *gt.m_tau - row.mean_measure_given_containment;
        } else {
            row.mean_measure_given_containment = std::numeric_limits<double>::quiet_NaN();
            row.regret_estimate = std::numeric_limits<double>::quiet_NaN();
        }
        row.excluded_from_fit = contained == 0 || !(row.regret_estimate > 0.0);
        if (!row.excluded_from_fit) {
            log_n.push_back(std::log(static_cast<double>(n)));
            log_r.push_back(std::log(row.regret_estimate));
        }
        report.rows.push_back(row);
    }
    if (const auto fit = detail::fit_log_slope(log_n, log_r)) {
        report.slope = fit->slope;
        report.slope_se = fit->se;
    }
    return report;
}

inline void write_report_csv(const ExperimentReport& report, std::ostream& out) {
    out << "n,reps,type1_rate,type1_ci_halfwidth,containment_count,"
           "mean_measure_given_containment,regret_estimate,excluded_from_fit\n";
    for (const auto& row : report.rows) {
        out << row.n << ',' << row.reps << ',' << detail::fmt17(row.type1_rate) << ','
            << detail::fmt17(row.type1_ci_halfwidth) << ',' << row.containment_count
            << ',' << detail::fmt17(row.mean_measure_given_containment) << ','
            << detail::fmt17(row.regret_estimate) << ','
            << (row.excluded_from_fit ? 1 : 0) << '\n';
    }
    out << "# fitted_slope," << (report.slope ? detail::fmt17(*report.slope) : "na")
        << '\n';
    out << "# fitted_slope_se,"
        << (report.slope_se ? detail::fmt17(*report.slope_se) : "na") << '\n';
    out << "# theoretical_exponent," << detail::fmt17(report.theoretical_exp) << '\n';
}

} // namespace subsel
