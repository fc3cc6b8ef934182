#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditfit/inference.hpp"
#include "banditfit/partition_model.hpp"
#include "banditfit/selection.hpp"

namespace banditfit {

// Bandits with expert advice. An expert is a deterministic policy over the
// observable past: reset, then alternately advise on the current context and
// observe the realized trial. Its advice at trial t may depend only on
// trials before t.
class Expert {
public:
    virtual ~Expert() = default;
    virtual const std::string& id() const = 0;
    virtual void reset(int action_count) = 0;
    virtual std::vector<double> advise(int context_id) = 0;
    virtual void observe(int context_id, int action, double reward) = 0;
};

// A partition model with frozen parameters, updated with the learner's
// realized actions and rewards.
class PartitionPolicyExpert final : public Expert {
public:
    PartitionPolicyExpert(PartitionModelSpec spec, ModelParams theta)
        : spec_(std::move(spec)), theta_(std::move(theta)), id_(spec_.name) {
        validate_params(spec_, theta_);
    }

    const std::string& id() const override { return id_; }

    void reset(int action_count) override { state_ = init_run_state(spec_, action_count); }

    std::vector<double> advise(int context_id) override {
        const int ci = spec_.partition.cell_of(context_id);
        return state_.cells[static_cast<std::size_t>(ci)].probs;
    }

    void observe(int context_id, int action, double reward) override {
        step_inplace(spec_, theta_, state_, context_id, action, reward);
    }

private:
    PartitionModelSpec spec_;
    ModelParams theta_;
    ModelRunState state_;
    std::string id_;
};

// A model for expert-set selection: the candidate set of strategies, the
// bounds for the single aggregation parameter (rate scale, like ParamBounds
// everywhere else), and the horizon used as sqrt(n) normalizer.
struct ExpertSetModel {
    std::string name;
    std::vector<std::shared_ptr<Expert>> experts;
    ParamBounds bounds;
    int horizon = 500;
};

struct Exp4State {
    std::vector<double> expert_weights;      // q, softmax of -rate * scores
    std::vector<double> cumulative_scores;   // sum of importance-weighted expert scores
    int step_count = 0;

    int expert_count() const { return static_cast<int>(expert_weights.size()); }
};

inline Exp4State init_exp4(int expert_count) {
    if (expert_count < 1) throw std::invalid_argument("init_exp4: need at least one expert");
    Exp4State s;
    s.expert_weights.assign(static_cast<std::size_t>(expert_count), 1.0 / expert_count);
    s.cumulative_scores.assign(static_cast<std::size_t>(expert_count), 0.0);
    return s;
}

using AdviceMatrix = std::vector<std::vector<double>>;  // per expert, per action

inline void check_advice(const Exp4State& state, const AdviceMatrix& advice) {
    if (static_cast<int>(advice.size()) != state.expert_count())
        throw std::invalid_argument("exp4: advice count does not match expert count");
}

// Mixture distribution over actions, sum_j q(j) * advice_j.
inline std::vector<double> exp4_predict(const Exp4State& state, const AdviceMatrix& advice) {
    check_advice(state, advice);
    const std::size_t action_count = advice.front().size();
    std::vector<double> probs(action_count, 0.0);
    for (std::size_t j = 0; j < advice.size(); ++j) {
        if (advice[j].size() != action_count)
            throw std::invalid_argument("exp4: inconsistent advice dimensions");
        for (std::size_t a = 0; a < action_count; ++a)
            probs[a] += state.expert_weights[j] * advice[j][a];
    }
    return probs;
}

// Importance-weighted expert scores: each expert is credited with
// advice_j(A) * g / pi(A) for the played action.
inline void exp4_update(Exp4State& state, const AdviceMatrix& advice, int action, double reward,
                        double theta_rate) {
    const std::vector<double> mixture = exp4_predict(state, advice);
    if (action < 1 || action > static_cast<int>(mixture.size()))
        throw std::invalid_argument("exp4_update: action out of range");
    if (!(reward >= 0.0 && reward <= 1.0))
        throw std::invalid_argument("exp4_update: reward outside [0,1]");
    const std::size_t a = static_cast<std::size_t>(action - 1);
    if (mixture[a] <= 0.0)
        throw std::invalid_argument("exp4_update: played action has zero mixture probability");
    const double weight = reward / mixture[a];
    for (std::size_t j = 0; j < advice.size(); ++j)
        state.cumulative_scores[j] += advice[j][a] * weight;
    softmax_into(state.cumulative_scores, -theta_rate, state.expert_weights);
    ++state.step_count;
}

inline Exp4State exp4_step(const ExpertSetModel& model, double theta, const Exp4State& state,
                           const AdviceMatrix& advice, int action, double reward) {
    const double root_n = std::sqrt(static_cast<double>(model.horizon));
    const double rate = theta / root_n;
    if (rate < model.bounds.lo - 1e-12 || rate > model.bounds.hi + 1e-12)
        throw std::invalid_argument("exp4_step: theta outside bounds");
    Exp4State next = state;
    exp4_update(next, advice, action, reward, rate);
    return next;
}

inline double exp4_lipschitz(double epsilon, double R) {
    return 1.0 / (R * epsilon * epsilon) * std::exp(1.0 / (epsilon * epsilon));
}

// Floor horizon and Lipschitz constant when every expert set has at most
// max_expert_count experts whose advice sums to at least rho per action.
inline TheoreticalConstants exp4_theoretical_constants(int max_expert_count, double rho,
                                                       double epsilon, int horizon, double R,
                                                       double r = 0.0) {
    if (max_expert_count < 1)
        throw std::invalid_argument("exp4_theoretical_constants: need |F| >= 1");
    if (!(rho > 0.0)) throw std::invalid_argument("exp4_theoretical_constants: need rho > 0");
    if (!(R > 0.0) || r < 0.0 || r >= R)
        throw std::invalid_argument("exp4_theoretical_constants: need 0 <= r < R");
    if (!(epsilon > 0.0 && epsilon < rho / max_expert_count))
        throw std::invalid_argument("exp4_theoretical_constants: need eps in (0, rho/|F|)");
    const double root_n = std::sqrt(static_cast<double>(horizon));
    TheoreticalConstants c;
    c.epsilon = epsilon;
    const double t_raw =
        std::floor((1.0 / max_expert_count - epsilon / rho) * root_n / R);
    c.t_epsilon = static_cast<int>(std::min(t_raw, static_cast<double>(horizon)));
    if (c.t_epsilon < 1)
        throw std::invalid_argument(
            "exp4_theoretical_constants: no positive floor horizon for these inputs");
    c.l_epsilon = exp4_lipschitz(epsilon, R);
    c.a_epsilon = c.l_epsilon * (R - r) + 2.0 * std::log(1.0 / epsilon);
    return c;
}

namespace detail {

// Advice of every expert at every trial of a fixed trajectory. Experts do
// not depend on the aggregation parameter, so this is computed once per
// (model, trajectory) and shared across likelihood evaluations.
inline std::vector<AdviceMatrix> collect_advice(const ExpertSetModel& model,
                                                const Trajectory& traj) {
    if (model.experts.empty())
        throw std::invalid_argument("expert set '" + model.name + "' has no experts");
    const int n = traj.length();
    std::vector<AdviceMatrix> advice(static_cast<std::size_t>(n));
    for (auto& expert : model.experts) expert->reset(traj.action_count);
    for (int t = 0; t < n; ++t) {
        AdviceMatrix at;
        at.reserve(model.experts.size());
        for (auto& expert : model.experts) {
            std::vector<double> xi = expert->advise(traj.contexts[static_cast<std::size_t>(t)]);
            if (static_cast<int>(xi.size()) != traj.action_count)
                throw std::invalid_argument("expert advice has wrong dimension");
            at.push_back(std::move(xi));
        }
        advice[static_cast<std::size_t>(t)] = std::move(at);
        for (auto& expert : model.experts)
            expert->observe(traj.contexts[static_cast<std::size_t>(t)],
                            traj.actions[static_cast<std::size_t>(t)],
                            traj.rewards[static_cast<std::size_t>(t)]);
    }
    return advice;
}

inline double exp4_window_ll(const std::vector<AdviceMatrix>& advice, const Trajectory& traj,
                             double theta_rate, int stop_time, double prob_floor) {
    Exp4State state = init_exp4(static_cast<int>(advice.front().size()));
    double total = 0.0;
    for (int t = 1; t <= stop_time; ++t) {
        const AdviceMatrix& at = advice[static_cast<std::size_t>(t - 1)];
        const std::vector<double> mixture = exp4_predict(state, at);
        const double p = mixture[static_cast<std::size_t>(traj.actions[static_cast<std::size_t>(t - 1)] - 1)];
        total += std::log(std::max(p, prob_floor));
        exp4_update(state, at, traj.actions[static_cast<std::size_t>(t - 1)],
                    traj.rewards[static_cast<std::size_t>(t - 1)], theta_rate);
    }
    return total;
}

}  // namespace detail

// Runs one synthetic Exp4 agent over the given contexts: experts advise,
// the mixture samples the action, everyone observes the outcome.
inline Trajectory simulate_exp4_agent(const ExpertSetModel& model, double theta,
                                      const std::vector<int>& contexts,
                                      const std::function<double(int, int)>& reward_rule,
                                      std::uint64_t seed, int action_count) {
    const double rate = theta / std::sqrt(static_cast<double>(model.horizon));
    Rng rng(seed);
    for (auto& expert : model.experts) expert->reset(action_count);
    Exp4State state = init_exp4(static_cast<int>(model.experts.size()));
    Trajectory traj;
    traj.action_count = action_count;
    traj.contexts = contexts;
    traj.actions.reserve(contexts.size());
    traj.rewards.reserve(contexts.size());
    for (int ctx : contexts) {
        AdviceMatrix at;
        at.reserve(model.experts.size());
        for (auto& expert : model.experts) at.push_back(expert->advise(ctx));
        const std::vector<double> mixture = exp4_predict(state, at);
        const int action = rng.sample(mixture) + 1;
        const double reward = reward_rule(ctx, action);
        exp4_update(state, at, action, reward, rate);
        for (auto& expert : model.experts) expert->observe(ctx, action, reward);
        traj.actions.push_back(action);
        traj.rewards.push_back(reward);
    }
    traj.generator_tag = GeneratorTag{model.name, {{theta}}, seed};
    return traj;
}

// Fits the scalar aggregation parameter of each expert-set model by
// maximizing the log-likelihood stopped at stop_time, then selects the model
// with the largest fitted stopped log-likelihood (no penalty: all models
// share the same single-parameter dimension).
inline SelectionReport expert_set_select(const std::vector<ExpertSetModel>& models,
                                         const Trajectory& traj, int stop_time,
                                         const OptimizerConfig& cfg) {
    if (models.empty()) throw std::invalid_argument("expert_set_select: no models");
    cfg.validate();
    const int n = traj.length();
    const int stop = stop_time > 0 ? stop_time : n;
    if (stop < 1 || stop > n)
        throw std::invalid_argument("expert_set_select: stop_time must satisfy 1 <= stop <= n");

    SelectionReport report;
    std::vector<double> criteria;
    for (const auto& model : models) {
        model.bounds.validate();
        const auto advice = detail::collect_advice(model, traj);
        const double root_n = std::sqrt(static_cast<double>(model.horizon));
        auto objective = [&](std::span<const double> rate) {
            return detail::exp4_window_ll(advice, traj, rate[0], stop, cfg.prob_floor);
        };
        const std::vector<double> lower{model.bounds.lo};
        const std::vector<double> upper{model.bounds.hi};
        double best_value = -std::numeric_limits<double>::infinity();
        double best_rate = model.bounds.midpoint();
        for (int restart = 0; restart < cfg.restarts; ++restart) {
            const std::uint64_t de_seed =
                derive_seed(cfg.seed, "exp4-fit", static_cast<std::uint64_t>(restart));
            auto de = de_maximize(objective, lower, upper, cfg.population_size,
                                  cfg.max_iterations, de_seed);
            if (de.best_value > best_value) {
                best_value = de.best_value;
                best_rate = de.best_point[0];
            }
        }
        ModelScore score;
        score.model = model.name;
        score.cell_count = static_cast<int>(model.experts.size());
        score.fit.theta = {{best_rate * root_n}};
        score.fit.log_likelihood = best_value;
        score.train_ll = best_value;
        score.criterion = best_value;
        criteria.push_back(best_value);
        report.per_model.push_back(std::move(score));
    }
    auto [best, tie] = detail::select_extremal(criteria, /*maximize=*/true);
    report.selected_index = best;
    report.selected = report.per_model[static_cast<std::size_t>(best)].model;
    report.tie_broken = tie;
    return report;
}

}  // namespace banditfit
