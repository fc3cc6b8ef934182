#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditfit/inference.hpp"
#include "banditfit/partition_model.hpp"

namespace banditfit {

// The two model-selection procedures. Hold-out: fit on trials [1, N-1],
// rank by test log-likelihood on [N, n] with the fitted parameters frozen
// (the test-period replay still consumes the realized history, so the
// candidate densities stay predictable). Penalized: fit on [1, stop_time],
// rank by -ll/stop_time + penalty.

struct HoldoutConfig {
    int split_n = 0;  // 0 -> ceil(n / 2)
    OptimizerConfig optimizer;
};

struct PenalizedConfig {
    double c = 0.012;
    int stop_time = 0;  // 0 -> n
    OptimizerConfig optimizer;
};

struct ModelScore {
    std::string model;
    int cell_count = 0;
    FitResult fit;
    double train_ll = std::numeric_limits<double>::quiet_NaN();
    double test_ll = std::numeric_limits<double>::quiet_NaN();
    double penalty = 0.0;
    double criterion = std::numeric_limits<double>::quiet_NaN();
};

struct SelectionReport {
    std::vector<ModelScore> per_model;
    int selected_index = -1;
    std::string selected;
    bool tie_broken = false;
};

// pen(m) = c * log(n)^2 * D_m / n.
inline double penalty(int cell_count, double c, int n) {
    if (n < 2) throw std::invalid_argument("penalty: need n >= 2");
    if (c < 0.0) throw std::invalid_argument("penalty: need c >= 0");
    const double log_n = std::log(static_cast<double>(n));
    return c * log_n * log_n * static_cast<double>(cell_count) / static_cast<double>(n);
}

// Model-collection constant log(A_eps) * sum_m exp(-D_m). Reported alongside
// the theoretical penalty shape; the selectors themselves never use it.
inline double sigma_epsilon(double a_epsilon, std::span<const int> cell_counts) {
    if (!(a_epsilon > 0.0)) throw std::invalid_argument("sigma_epsilon: need A_eps > 0");
    double total = 0.0;
    for (int d : cell_counts) total += std::exp(-static_cast<double>(d));
    return std::log(a_epsilon) * total;
}

namespace detail {

// First extremal index wins; ties (exact float equality) are flagged.
inline std::pair<int, bool> select_extremal(const std::vector<double>& values, bool maximize) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        const double v = values[static_cast<std::size_t>(i)];
        const double b = values[static_cast<std::size_t>(best)];
        if (maximize ? v > b : v < b) best = i;
    }
    bool tie = false;
    for (int i = 0; i < static_cast<int>(values.size()); ++i)
        if (i != best &&
            values[static_cast<std::size_t>(i)] == values[static_cast<std::size_t>(best)])
            tie = true;
    return {best, tie};
}

}  // namespace detail

inline SelectionReport holdout_select(const std::vector<PartitionModelSpec>& catalog,
                                      const Trajectory& traj, const HoldoutConfig& cfg) {
    if (catalog.empty()) throw std::invalid_argument("holdout_select: empty catalog");
    const int n = traj.length();
    const int split = cfg.split_n > 0 ? cfg.split_n : (n + 1) / 2;
    if (split < 2 || split > n)
        throw std::invalid_argument("holdout_select: split N must satisfy 2 <= N <= n");

    const LikelihoodWindow train{1, split - 1};
    const LikelihoodWindow test{split, n};
    SelectionReport report;
    std::vector<double> criteria;
    for (const auto& spec : catalog) {
        ModelScore score;
        score.model = spec.name;
        score.cell_count = spec.partition.cell_count();
        score.fit = fit_mle(spec, traj, train, cfg.optimizer);
        score.train_ll = score.fit.log_likelihood;
        score.test_ll =
            log_likelihood(spec, score.fit.theta, traj, test, cfg.optimizer.prob_floor);
        score.criterion = score.test_ll;
        criteria.push_back(score.criterion);
        report.per_model.push_back(std::move(score));
    }
    auto [best, tie] = detail::select_extremal(criteria, /*maximize=*/true);
    report.selected_index = best;
    report.selected = report.per_model[static_cast<std::size_t>(best)].model;
    report.tie_broken = tie;
    return report;
}

inline SelectionReport penalized_select(const std::vector<PartitionModelSpec>& catalog,
                                        const Trajectory& traj, const PenalizedConfig& cfg) {
    if (catalog.empty()) throw std::invalid_argument("penalized_select: empty catalog");
    const int n = traj.length();
    const int stop = cfg.stop_time > 0 ? cfg.stop_time : n;
    if (stop < 1 || stop > n)
        throw std::invalid_argument("penalized_select: stop_time must satisfy 1 <= stop <= n");
    if (cfg.c < 0.0) throw std::invalid_argument("penalized_select: c must be >= 0");

    const LikelihoodWindow window{1, stop};
    SelectionReport report;
    std::vector<double> criteria;
    for (const auto& spec : catalog) {
        ModelScore score;
        score.model = spec.name;
        score.cell_count = spec.partition.cell_count();
        score.fit = fit_mle(spec, traj, window, cfg.optimizer);
        score.train_ll = score.fit.log_likelihood;
        score.penalty = penalty(score.cell_count, cfg.c, n);
        score.criterion = -score.train_ll / static_cast<double>(stop) + score.penalty;
        criteria.push_back(score.criterion);
        report.per_model.push_back(std::move(score));
    }
    auto [best, tie] = detail::select_extremal(criteria, /*maximize=*/false);
    report.selected_index = best;
    report.selected = report.per_model[static_cast<std::size_t>(best)].model;
    report.tie_broken = tie;
    return report;
}

}  // namespace banditfit
