#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditfit/cell_bandit.hpp"
#include "banditfit/rng.hpp"
#include "banditfit/stimulus.hpp"

namespace banditfit {

// A fixed partition of the context-id space. Each context id belongs to
// exactly one cell; the owning cell's bandit is the only thing that sees it.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<std::vector<int>> cells) : cells_(std::move(cells)) {
        if (cells_.empty()) throw std::invalid_argument("Partition: no cells");
        int max_id = 0;
        for (const auto& cell : cells_) {
            if (cell.empty()) throw std::invalid_argument("Partition: empty cell");
            for (int id : cell) {
                if (id < 1) throw std::invalid_argument("Partition: context ids are 1-based");
                max_id = std::max(max_id, id);
            }
        }
        lookup_.assign(static_cast<std::size_t>(max_id) + 1, -1);
        for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
            for (int id : cells_[ci]) {
                if (lookup_[static_cast<std::size_t>(id)] != -1)
                    throw std::invalid_argument("Partition: context id " + std::to_string(id) +
                                                " appears in two cells");
                lookup_[static_cast<std::size_t>(id)] = static_cast<int>(ci);
            }
        }
        for (std::size_t id = 1; id < lookup_.size(); ++id)
            if (lookup_[id] != -1) universe_.push_back(static_cast<int>(id));
    }

    int cell_count() const { return static_cast<int>(cells_.size()); }
    const std::vector<std::vector<int>>& cells() const { return cells_; }
    const std::vector<int>& universe() const { return universe_; }

    bool contains(int context_id) const {
        return context_id >= 1 && context_id < static_cast<int>(lookup_.size()) &&
               lookup_[static_cast<std::size_t>(context_id)] != -1;
    }

    int cell_of(int context_id) const {
        if (!contains(context_id))
            throw std::invalid_argument("Partition: unknown context id " +
                                        std::to_string(context_id));
        return lookup_[static_cast<std::size_t>(context_id)];
    }

private:
    std::vector<std::vector<int>> cells_;
    std::vector<int> lookup_;
    std::vector<int> universe_;
};

struct PartitionModelSpec {
    std::string name;
    Partition partition;
    CellBanditKind cell_kind = CellBanditKind::gradient_bandit;
    ParamBounds bounds;
    int horizon = 500;
    GradientSign sign = GradientSign::reward_ascent;
};

// Raw per-cell parameters, indexed like Partition::cells().
using ModelParams = std::vector<std::vector<double>>;

struct GeneratorTag {
    std::string model;
    ModelParams theta;
    std::uint64_t seed = 0;
};

struct Trajectory {
    std::vector<int> contexts;
    std::vector<int> actions;  // 1..K
    std::vector<double> rewards;
    int action_count = 2;
    std::optional<GeneratorTag> generator_tag;

    int length() const { return static_cast<int>(contexts.size()); }

    void validate() const {
        if (contexts.size() != actions.size() || contexts.size() != rewards.size())
            throw std::invalid_argument("Trajectory: field lengths differ");
        if (action_count < 2) throw std::invalid_argument("Trajectory: need K >= 2");
        for (std::size_t t = 0; t < actions.size(); ++t) {
            if (actions[t] < 1 || actions[t] > action_count)
                throw std::invalid_argument("Trajectory: action out of range at trial " +
                                            std::to_string(t + 1));
            if (!(rewards[t] >= 0.0 && rewards[t] <= 1.0))
                throw std::invalid_argument("Trajectory: reward outside [0,1] at trial " +
                                            std::to_string(t + 1));
        }
    }
};

struct ModelRunState {
    std::vector<CellState> cells;
    int step_count = 0;
};

inline void validate_params(const PartitionModelSpec& spec, const ModelParams& theta) {
    spec.bounds.validate();
    if (static_cast<int>(theta.size()) != spec.partition.cell_count())
        throw std::invalid_argument("ModelParams: one parameter vector per cell required");
    const int d = param_dim(spec.cell_kind);
    const double root_n = std::sqrt(static_cast<double>(spec.horizon));
    for (const auto& cell_values : theta) {
        if (static_cast<int>(cell_values.size()) != d)
            throw std::invalid_argument("ModelParams: wrong parameter dimension");
        for (double v : cell_values) {
            const double rate = v / root_n;
            if (rate < spec.bounds.lo - 1e-12 || rate > spec.bounds.hi + 1e-12)
                throw std::invalid_argument("ModelParams: parameter outside bounds");
        }
    }
}

// Same raw value in every cell.
inline ModelParams homogeneous_params(const PartitionModelSpec& spec, double theta) {
    ModelParams out(static_cast<std::size_t>(spec.partition.cell_count()));
    for (auto& cell : out) cell.assign(static_cast<std::size_t>(param_dim(spec.cell_kind)), theta);
    return out;
}

inline ModelRunState init_run_state(const PartitionModelSpec& spec, int action_count) {
    ModelRunState state;
    state.cells.reserve(static_cast<std::size_t>(spec.partition.cell_count()));
    for (int c = 0; c < spec.partition.cell_count(); ++c)
        state.cells.push_back(init_cell(action_count));
    return state;
}

// What a cell consumes: the task emits rewards; exp3ix cells run on losses,
// so they see 1 - reward.
inline double cell_input(CellBanditKind kind, double reward) {
    return kind == CellBanditKind::exp3ix ? 1.0 - reward : reward;
}

// Action distribution at the current step for a context: the owning cell's
// probability vector.
inline std::vector<double> predict(const PartitionModelSpec& spec, const ModelParams& theta,
                                   const ModelRunState& state, int context_id) {
    validate_params(spec, theta);
    const int ci = spec.partition.cell_of(context_id);
    return state.cells[static_cast<std::size_t>(ci)].probs;
}

inline void step_inplace(const PartitionModelSpec& spec, const ModelParams& theta,
                         ModelRunState& state, int context_id, int action, double reward) {
    const int ci = spec.partition.cell_of(context_id);
    const auto& values = theta[static_cast<std::size_t>(ci)];
    const double root_n = std::sqrt(static_cast<double>(spec.horizon));
    CellState& cell = state.cells[static_cast<std::size_t>(ci)];
    if (spec.cell_kind == CellBanditKind::gradient_bandit) {
        gradient_update(cell, action, reward, values[0] / root_n, spec.sign);
    } else {
        exp3ix_update(cell, action, cell_input(spec.cell_kind, reward), values[0] / root_n,
                      values[1] / root_n);
    }
    ++state.step_count;
}

inline ModelRunState step(const PartitionModelSpec& spec, const ModelParams& theta,
                          const ModelRunState& state, int context_id, int action, double reward) {
    validate_params(spec, theta);
    ModelRunState next = state;
    step_inplace(spec, theta, next, context_id, action, reward);
    return next;
}

// Runs one synthetic agent: at each trial samples an action from the owning
// cell, collects the reward, and updates that cell. Fully determined by the
// seed.
inline Trajectory simulate_agent(const PartitionModelSpec& spec, const ModelParams& theta,
                                 const std::vector<int>& contexts,
                                 const std::function<double(int, int)>& reward_rule,
                                 std::uint64_t seed, int action_count) {
    validate_params(spec, theta);
    Rng rng(seed);
    ModelRunState state = init_run_state(spec, action_count);
    Trajectory traj;
    traj.action_count = action_count;
    const std::size_t n = contexts.size();
    traj.contexts = contexts;
    traj.actions.reserve(n);
    traj.rewards.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        const int ctx = contexts[t];
        const int ci = spec.partition.cell_of(ctx);
        const int action = rng.sample(state.cells[static_cast<std::size_t>(ci)].probs) + 1;
        const double reward = reward_rule(ctx, action);
        step_inplace(spec, theta, state, ctx, action, reward);
        traj.actions.push_back(action);
        traj.rewards.push_back(reward);
    }
    traj.generator_tag = GeneratorTag{spec.name, theta, seed};
    return traj;
}

inline const std::vector<std::string>& canonical_model_names() {
    static const std::vector<std::string> names{"OneForAll",  "ByShape",      "ByPattern",
                                                "ByShapeExc", "ByPatternExc", "OnePerItem"};
    return names;
}

// The six models of the categorization task, in increasing cell count so
// selection ties resolve toward parsimony. Exceptions are the objects whose
// category disagrees with the rest of their shape/pattern group.
inline std::vector<PartitionModelSpec> canonical_catalog(const StimulusSet& set,
                                                         CellBanditKind cell_kind,
                                                         ParamBounds bounds, int horizon,
                                                         GradientSign sign =
                                                             GradientSign::reward_ascent) {
    if (set.objects.size() != 9)
        throw std::invalid_argument("canonical_catalog: expects the nine-object set");
    auto make = [&](std::string name, std::vector<std::vector<int>> cells) {
        PartitionModelSpec spec;
        spec.name = std::move(name);
        spec.partition = Partition(std::move(cells));
        spec.cell_kind = cell_kind;
        spec.bounds = bounds;
        spec.horizon = horizon;
        spec.sign = sign;
        return spec;
    };
    return {
        make("OneForAll", {{1, 2, 3, 4, 5, 6, 7, 8, 9}}),
        make("ByShape", {{1, 2, 3, 4, 5}, {6, 7, 8, 9}}),
        make("ByPattern", {{1, 2, 3, 6, 7}, {4, 5, 8, 9}}),
        make("ByShapeExc", {{1, 2, 3, 5}, {6, 8, 9}, {7}, {4}}),
        make("ByPatternExc", {{1, 2, 3, 7}, {4, 8, 9}, {6}, {5}}),
        make("OnePerItem", {{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}}),
    };
}

}  // namespace banditfit
