#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "banditfit/optimizer.hpp"
#include "banditfit/partition_model.hpp"

namespace banditfit {

// 1-based inclusive trial range. The state replay always starts at trial 1;
// the window only selects which trials contribute to the sum.
struct LikelihoodWindow {
    int from_t = 1;
    int to_t = 1;

    void validate(int n) const {
        if (from_t < 1 || to_t < from_t || to_t > n)
            throw std::invalid_argument("LikelihoodWindow: need 1 <= from <= to <= n");
    }
    int length() const { return to_t - from_t + 1; }
    bool contains(int t) const { return t >= from_t && t <= to_t; }
};

struct OptimizerConfig {
    int population_size = 16;
    int max_iterations = 20;
    std::uint64_t seed = 0;
    int restarts = 2;
    double prob_floor = 1e-12;

    void validate() const {
        if (population_size < 4)
            throw std::invalid_argument("OptimizerConfig: population_size < 4");
        if (max_iterations < 1)
            throw std::invalid_argument("OptimizerConfig: max_iterations < 1");
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts < 1");
        if (!(prob_floor > 0.0)) throw std::invalid_argument("OptimizerConfig: prob_floor <= 0");
    }
};

struct FitResult {
    ModelParams theta;
    double log_likelihood = 0.0;
    std::vector<double> per_cell_ll;
    // Cells with fewer than 2 * param_dim trials in the window; for cells
    // with zero window trials theta is the box midpoint and the cell
    // contributes 0 to the likelihood.
    std::vector<bool> under_determined;
    std::vector<int> window_trials;
};

// Partial log-likelihood: replays the model from trial 1 and sums
// log p_t(A_t) for t inside the window. Predicted probabilities are clamped
// below at prob_floor so the result is always finite for in-box parameters.
inline double log_likelihood(const PartitionModelSpec& spec, const ModelParams& theta,
                             const Trajectory& traj, LikelihoodWindow window,
                             double prob_floor = 1e-12) {
    window.validate(traj.length());
    validate_params(spec, theta);
    ModelRunState state = init_run_state(spec, traj.action_count);
    double total = 0.0;
    for (int t = 1; t <= window.to_t; ++t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        const int ctx = traj.contexts[i];
        const int ci = spec.partition.cell_of(ctx);
        if (window.contains(t)) {
            const double p =
                state.cells[static_cast<std::size_t>(ci)].probs[static_cast<std::size_t>(
                    traj.actions[i] - 1)];
            total += std::log(std::max(p, prob_floor));
        }
        step_inplace(spec, theta, state, ctx, traj.actions[i], traj.rewards[i]);
    }
    return total;
}

namespace detail {

struct CellTrial {
    int action = 0;
    double reward = 0.0;
    bool in_window = false;
};

// Windowed log-likelihood of a single cell, replaying only its own trials.
// Valid because a cell's state never depends on other cells' trials.
inline double cell_window_ll(CellBanditKind kind, GradientSign sign,
                             std::span<const CellTrial> trials, std::span<const double> rates,
                             int action_count, double prob_floor) {
    CellState cell = init_cell(action_count);
    double total = 0.0;
    for (const CellTrial& tr : trials) {
        if (tr.in_window) {
            const double p = cell.probs[static_cast<std::size_t>(tr.action - 1)];
            total += std::log(std::max(p, prob_floor));
        }
        if (kind == CellBanditKind::gradient_bandit) {
            gradient_update(cell, tr.action, tr.reward, rates[0], sign);
        } else {
            exp3ix_update(cell, tr.action, cell_input(kind, tr.reward), rates[0], rates[1]);
        }
    }
    return total;
}

}  // namespace detail

// Maximum-likelihood fit over the window, one bounded DE per cell (exact by
// the per-cell factorization of the likelihood). The search runs on the
// normalized rate scale and reports raw parameters. Deterministic given
// cfg.seed: the DE stream for a cell depends only on (cfg.seed, cell index,
// restart), never on the model name or calling context.
inline FitResult fit_mle(const PartitionModelSpec& spec, const Trajectory& traj,
                         LikelihoodWindow window, const OptimizerConfig& cfg) {
    window.validate(traj.length());
    cfg.validate();
    spec.bounds.validate();
    const int cell_count = spec.partition.cell_count();
    const int d = param_dim(spec.cell_kind);
    const double root_n = std::sqrt(static_cast<double>(spec.horizon));

    std::vector<std::vector<detail::CellTrial>> cell_trials(
        static_cast<std::size_t>(cell_count));
    std::vector<int> in_window(static_cast<std::size_t>(cell_count), 0);
    for (int t = 1; t <= window.to_t; ++t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        const int ci = spec.partition.cell_of(traj.contexts[i]);
        const bool inw = window.contains(t);
        cell_trials[static_cast<std::size_t>(ci)].push_back(
            {traj.actions[i], traj.rewards[i], inw});
        if (inw) ++in_window[static_cast<std::size_t>(ci)];
    }

    FitResult result;
    result.theta.assign(static_cast<std::size_t>(cell_count), {});
    result.per_cell_ll.assign(static_cast<std::size_t>(cell_count), 0.0);
    result.under_determined.assign(static_cast<std::size_t>(cell_count), false);
    result.window_trials.assign(static_cast<std::size_t>(cell_count), 0);

    const std::vector<double> lower(static_cast<std::size_t>(d), spec.bounds.lo);
    const std::vector<double> upper(static_cast<std::size_t>(d), spec.bounds.hi);

    for (int ci = 0; ci < cell_count; ++ci) {
        const std::size_t c = static_cast<std::size_t>(ci);
        result.window_trials[c] = in_window[c];
        if (in_window[c] == 0) {
            result.theta[c].assign(static_cast<std::size_t>(d),
                                   spec.bounds.midpoint() * root_n);
            result.under_determined[c] = true;
            continue;
        }
        result.under_determined[c] = in_window[c] < 2 * d;
        const auto& trials = cell_trials[c];
        auto objective = [&](std::span<const double> rates) {
            return detail::cell_window_ll(spec.cell_kind, spec.sign, trials, rates,
                                          traj.action_count, cfg.prob_floor);
        };
        std::vector<double> best_point;
        double best_value = -std::numeric_limits<double>::infinity();
        for (int restart = 0; restart < cfg.restarts; ++restart) {
            const std::uint64_t de_seed =
                derive_seed(cfg.seed, "fit-cell",
                            static_cast<std::uint64_t>(ci) * 1000003ULL +
                                static_cast<std::uint64_t>(restart));
            auto de = de_maximize(objective, lower, upper, cfg.population_size,
                                  cfg.max_iterations, de_seed);
            if (de.best_value > best_value) {
                best_value = de.best_value;
                best_point = de.best_point;
            }
        }
        result.per_cell_ll[c] = best_value;
        result.theta[c].resize(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k)
            result.theta[c][static_cast<std::size_t>(k)] =
                best_point[static_cast<std::size_t>(k)] * root_n;
        result.log_likelihood += best_value;
    }
    return result;
}

}  // namespace banditfit
