#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

#include "banditfit/inference.hpp"
#include "banditfit/partition_model.hpp"

namespace banditfit {

// Conditional risks between the true and a candidate action law at one
// trial, computed exactly over the finite action set. Averaging these over
// trials and fresh simulated trajectories Monte-Carlo-estimates the
// stochastic KL and squared-Hellinger risks of an estimator.

// sum_a p*(a) log(p*(a)/p(a)), with 0 log 0 = 0. A zero candidate entry
// facing positive truth yields +infinity; callers decide how to report it.
inline double conditional_kl(std::span<const double> true_probs,
                             std::span<const double> cand_probs) {
    if (true_probs.size() != cand_probs.size())
        throw std::invalid_argument("conditional_kl: dimension mismatch");
    double total = 0.0;
    for (std::size_t a = 0; a < true_probs.size(); ++a) {
        const double p = true_probs[a];
        if (p == 0.0) continue;
        if (cand_probs[a] == 0.0) return std::numeric_limits<double>::infinity();
        total += p * std::log(p / cand_probs[a]);
    }
    return total;
}

// Squared Hellinger distance, 0.5 * sum_a (sqrt p*(a) - sqrt p(a))^2; equals
// 1 - sum_a sqrt(p*(a) p(a)) and is exactly 0 for bitwise-equal inputs.
inline double conditional_hellinger_sq(std::span<const double> true_probs,
                                       std::span<const double> cand_probs) {
    if (true_probs.size() != cand_probs.size())
        throw std::invalid_argument("conditional_hellinger_sq: dimension mismatch");
    double total = 0.0;
    for (std::size_t a = 0; a < true_probs.size(); ++a) {
        const double diff = std::sqrt(true_probs[a]) - std::sqrt(cand_probs[a]);
        total += diff * diff;
    }
    return 0.5 * total;
}

struct RiskEstimate {
    double kl = 0.0;
    double hellinger_sq = 0.0;
    LikelihoodWindow window;
    int n_trajectories = 0;
    // Count of per-trial KL terms that were +infinity; such terms are
    // excluded from the kl average rather than clamped. A nonzero count
    // means the candidate assigns zero probability somewhere on-path.
    long long kl_infinite_terms = 0;
};

// Simulates n_trajectories agents from the generator, replays generator and
// candidate on each realized history, and averages the conditional risks
// over window trials and trajectories. Both conditional laws are exact
// given the history; only the trajectory draw is Monte Carlo.
inline RiskEstimate trajectory_risk(const PartitionModelSpec& gen_spec,
                                    const ModelParams& gen_theta,
                                    const PartitionModelSpec& cand_spec,
                                    const ModelParams& cand_theta, const StimulusSet& set,
                                    const ContextSchedule& schedule,
                                    const std::function<double(int, int)>& reward_rule,
                                    LikelihoodWindow window, int n_trajectories,
                                    std::uint64_t seed) {
    if (n_trajectories < 1)
        throw std::invalid_argument("trajectory_risk: need at least one trajectory");
    window.validate(schedule.horizon);
    validate_params(gen_spec, gen_theta);
    validate_params(cand_spec, cand_theta);
    if (gen_spec.partition.universe() != cand_spec.partition.universe())
        throw std::invalid_argument("trajectory_risk: models live on different context spaces");

    const int action_count = set.action_count;
    RiskEstimate estimate;
    estimate.window = window;
    estimate.n_trajectories = n_trajectories;

    double kl_sum = 0.0;
    double h2_sum = 0.0;
    long long kl_terms = 0;
    long long h2_terms = 0;

    for (int rep = 0; rep < n_trajectories; ++rep) {
        ContextSchedule rep_schedule = schedule;
        rep_schedule.seed = derive_seed(seed, "risk-contexts", static_cast<std::uint64_t>(rep));
        const std::vector<int> contexts = generate_context_sequence(set, rep_schedule);
        Rng rng(derive_seed(seed, "risk-agent", static_cast<std::uint64_t>(rep)));

        ModelRunState gen_state = init_run_state(gen_spec, action_count);
        ModelRunState cand_state = init_run_state(cand_spec, action_count);
        for (int t = 1; t <= window.to_t; ++t) {
            const int ctx = contexts[static_cast<std::size_t>(t - 1)];
            const auto& p_true =
                gen_state.cells[static_cast<std::size_t>(gen_spec.partition.cell_of(ctx))].probs;
            const auto& p_cand =
                cand_state.cells[static_cast<std::size_t>(cand_spec.partition.cell_of(ctx))]
                    .probs;
            if (window.contains(t)) {
                const double kl = conditional_kl(p_true, p_cand);
                if (std::isinf(kl)) {
                    ++estimate.kl_infinite_terms;
                } else {
                    kl_sum += kl;
                    ++kl_terms;
                }
                h2_sum += conditional_hellinger_sq(p_true, p_cand);
                ++h2_terms;
            }
            const int action = rng.sample(p_true) + 1;
            const double reward = reward_rule(ctx, action);
            step_inplace(gen_spec, gen_theta, gen_state, ctx, action, reward);
            step_inplace(cand_spec, cand_theta, cand_state, ctx, action, reward);
        }
    }
    estimate.kl = kl_terms > 0 ? kl_sum / static_cast<double>(kl_terms) : 0.0;
    estimate.hellinger_sq = h2_terms > 0 ? h2_sum / static_cast<double>(h2_terms) : 0.0;
    return estimate;
}

}  // namespace banditfit
