#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace banditfit {

// Elementary softmax bandits run inside one cell of a context partition.
// Both families keep cumulative scores and recompute the probability vector
// as a softmax of rate * scores, where the effective rate is the raw
// parameter divided by sqrt(horizon). Storing scores instead of multiplying
// probabilities keeps long runs stable and makes the log-ratio Lipschitz
// bound directly checkable.

enum class CellBanditKind { gradient_bandit, exp3ix };

// The gradient-bandit update as printed uses exp(-theta * scores) while
// feeding rewards, which makes rewarded actions rarer. reward_ascent flips
// the exponent so agents improve at the task; literal_paper keeps the
// printed sign.
enum class GradientSign { reward_ascent, literal_paper };

inline int param_dim(CellBanditKind kind) {
    return kind == CellBanditKind::exp3ix ? 2 : 1;
}

inline const char* to_string(CellBanditKind kind) {
    return kind == CellBanditKind::exp3ix ? "exp3ix" : "gradient_bandit";
}

inline CellBanditKind cell_kind_from_string(const std::string& s) {
    if (s == "gradient_bandit") return CellBanditKind::gradient_bandit;
    if (s == "exp3ix") return CellBanditKind::exp3ix;
    throw std::invalid_argument("unknown cell bandit kind: " + s);
}

// Closed interval for each parameter coordinate, on the normalized rate
// scale theta / sqrt(horizon). Raw parameters therefore live in
// [lo * sqrt(n), hi * sqrt(n)].
struct ParamBounds {
    double lo = 0.0;
    double hi = 1.0;

    void validate() const {
        if (!(lo >= 0.0) || !(hi > lo))
            throw std::invalid_argument("ParamBounds: need 0 <= lo < hi");
    }
    double midpoint() const { return 0.5 * (lo + hi); }
};

struct CellParams {
    CellBanditKind kind = CellBanditKind::gradient_bandit;
    // Raw (un-normalized) parameters; the update divides by sqrt(horizon).
    // gradient_bandit: {theta}. exp3ix: {eta, gamma}.
    std::vector<double> values;
    ParamBounds bounds;
    int horizon = 1;
    GradientSign sign = GradientSign::reward_ascent;

    void validate() const {
        bounds.validate();
        if (horizon < 1) throw std::invalid_argument("CellParams: horizon must be >= 1");
        if (static_cast<int>(values.size()) != param_dim(kind))
            throw std::invalid_argument("CellParams: wrong parameter dimension");
        const double root_n = std::sqrt(static_cast<double>(horizon));
        for (double v : values) {
            const double rate = v / root_n;
            if (rate < bounds.lo - 1e-12 || rate > bounds.hi + 1e-12)
                throw std::invalid_argument("CellParams: parameter outside bounds");
        }
    }
};

struct CellState {
    std::vector<double> probs;
    std::vector<double> cumulative_scores;
    int local_time = 0;

    int arm_count() const { return static_cast<int>(probs.size()); }
};

inline CellState init_cell(int action_count) {
    if (action_count < 2) throw std::invalid_argument("init_cell: need at least 2 actions");
    CellState s;
    s.probs.assign(static_cast<std::size_t>(action_count), 1.0 / action_count);
    s.cumulative_scores.assign(static_cast<std::size_t>(action_count), 0.0);
    s.local_time = 0;
    return s;
}

// out[i] = exp(scale * scores[i] - max) / Z. Max-subtraction keeps the
// exponent bounded as scores grow linearly in local time.
inline void softmax_into(std::span<const double> scores, double scale, std::span<double> out) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double s : scores) hi = std::max(hi, scale * s);
    double z = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scale * scores[i] - hi);
        z += out[i];
    }
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] /= z;
}

namespace detail {

inline void check_action(const CellState& s, int action) {
    if (action < 1 || action > s.arm_count())
        throw std::invalid_argument("cell update: action out of range");
}

}  // namespace detail

// In-place cores on the rate scale (rate = raw value / sqrt(horizon)).
// Replay loops use these to avoid per-step allocation.

inline void gradient_update(CellState& s, int action, double reward, double rate,
                            GradientSign sign) {
    detail::check_action(s, action);
    if (!(reward >= 0.0 && reward <= 1.0))
        throw std::invalid_argument("gradient_update: reward outside [0,1]");
    const std::size_t a = static_cast<std::size_t>(action - 1);
    for (std::size_t b = 0; b < s.cumulative_scores.size(); ++b) {
        const double indicator = (b == a) ? 1.0 : 0.0;
        s.cumulative_scores[b] += (indicator - s.probs[b]) * reward;
    }
    const double scale = (sign == GradientSign::reward_ascent) ? rate : -rate;
    softmax_into(s.cumulative_scores, scale, s.probs);
    ++s.local_time;
}

inline void exp3ix_update(CellState& s, int action, double loss, double eta_rate,
                          double gamma_rate) {
    detail::check_action(s, action);
    if (!(loss >= 0.0 && loss <= 1.0))
        throw std::invalid_argument("exp3ix_update: loss outside [0,1]");
    const std::size_t a = static_cast<std::size_t>(action - 1);
    s.cumulative_scores[a] += loss / (gamma_rate + s.probs[a]);
    softmax_into(s.cumulative_scores, -eta_rate, s.probs);
    ++s.local_time;
}

// Pure single-step operations.

inline CellState gradient_step(const CellState& state, int action, double reward,
                               const CellParams& params) {
    if (params.kind != CellBanditKind::gradient_bandit)
        throw std::invalid_argument("gradient_step: params are not gradient_bandit");
    params.validate();
    CellState next = state;
    const double rate = params.values[0] / std::sqrt(static_cast<double>(params.horizon));
    gradient_update(next, action, reward, rate, params.sign);
    return next;
}

inline CellState exp3ix_step(const CellState& state, int action, double loss,
                             const CellParams& params) {
    if (params.kind != CellBanditKind::exp3ix)
        throw std::invalid_argument("exp3ix_step: params are not exp3ix");
    params.validate();
    CellState next = state;
    const double root_n = std::sqrt(static_cast<double>(params.horizon));
    exp3ix_update(next, action, loss, params.values[0] / root_n, params.values[1] / root_n);
    return next;
}

// ---------------------------------------------------------------------------
// Closed-form horizons and Lipschitz constants. R and r bound the raw
// parameter coordinates (same scale as CellParams::values). Up to local time
// T_epsilon every probability stays >= epsilon, and the log-probability
// ratio between two parameter choices is L_epsilon-Lipschitz in the
// parameter.

struct TheoreticalConstants {
    double epsilon = 0.0;
    int t_epsilon = 0;
    double l_epsilon = 0.0;
    double a_epsilon = 0.0;
};

inline double exp3ix_lipschitz(double epsilon, int horizon, double R) {
    const double n = static_cast<double>(horizon);
    return std::sqrt(R * R / n + epsilon * epsilon) / (epsilon * epsilon * epsilon * R) *
           std::exp(1.0 / (epsilon * epsilon));
}

inline double gradient_lipschitz(int action_count, double epsilon, double R) {
    const double half_log = std::log(std::sqrt(1.0 / (action_count * epsilon)));
    return std::sqrt(2.0) / (R * epsilon) * half_log / std::sqrt(action_count * epsilon);
}

inline TheoreticalConstants theoretical_constants(CellBanditKind kind, int action_count,
                                                  double epsilon, int horizon, double R,
                                                  double r = 0.0) {
    if (action_count < 2) throw std::invalid_argument("theoretical_constants: need K >= 2");
    if (horizon < 1) throw std::invalid_argument("theoretical_constants: need horizon >= 1");
    if (!(R > 0.0) || r < 0.0 || r >= R)
        throw std::invalid_argument("theoretical_constants: need 0 <= r < R");

    const double root_n = std::sqrt(static_cast<double>(horizon));
    TheoreticalConstants c;
    c.epsilon = epsilon;
    double t_raw = 0.0;
    if (kind == CellBanditKind::exp3ix) {
        if (!(epsilon > 0.0 && epsilon < 1.0 / action_count))
            throw std::invalid_argument("theoretical_constants: exp3ix needs eps in (0, 1/K)");
        t_raw = std::floor((1.0 / action_count - epsilon) * root_n / R);
        c.l_epsilon = exp3ix_lipschitz(epsilon, horizon, R);
    } else {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("theoretical_constants: gradient needs eps in (0, 1)");
        t_raw = std::floor(std::log(std::sqrt(1.0 / (action_count * epsilon))) * root_n / R);
        c.l_epsilon = gradient_lipschitz(action_count, epsilon, R);
    }
    c.t_epsilon = static_cast<int>(std::min(t_raw, static_cast<double>(horizon)));
    if (c.t_epsilon < 1)
        throw std::invalid_argument(
            "theoretical_constants: no positive floor horizon for these (eps, n, R)");
    const double d = static_cast<double>(param_dim(kind));
    c.a_epsilon = c.l_epsilon * std::sqrt(d) * (R - r) + 2.0 * std::log(1.0 / epsilon);
    return c;
}

}  // namespace banditfit
