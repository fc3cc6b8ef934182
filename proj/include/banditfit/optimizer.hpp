#pragma once

#include <algorithm>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "banditfit/rng.hpp"

namespace banditfit {

// Bounded differential evolution (local-to-best/1/bin), maximizing. Greedy
// replacement makes the best objective value non-decreasing across
// generations; best_value_history records it per generation.
struct DifferentialEvolutionResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    std::vector<double> best_value_history;
};

inline DifferentialEvolutionResult de_maximize(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> lower, std::span<const double> upper, int population_size,
    int max_iterations, std::uint64_t seed) {
    const std::size_t dim = lower.size();
    if (dim == 0 || upper.size() != dim) throw std::invalid_argument("de_maximize: bad bounds");
    for (std::size_t i = 0; i < dim; ++i)
        if (!(upper[i] > lower[i])) throw std::invalid_argument("de_maximize: lower >= upper");
    if (population_size < 4) throw std::invalid_argument("de_maximize: population_size < 4");
    if (max_iterations < 1) throw std::invalid_argument("de_maximize: max_iterations < 1");

    constexpr double kWeight = 0.8;     // differential weight F
    constexpr double kCrossover = 0.9;  // crossover probability CR

    Rng rng(seed);
    const std::size_t np = static_cast<std::size_t>(population_size);
    std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
    std::vector<double> fit(np);
    std::size_t best = 0;
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t d = 0; d < dim; ++d) pop[i][d] = rng.uniform(lower[d], upper[d]);
        fit[i] = objective(pop[i]);
        if (fit[i] > fit[best]) best = i;
    }

    DifferentialEvolutionResult result;
    result.best_value_history.reserve(static_cast<std::size_t>(max_iterations));
    std::vector<double> trial(dim);
    for (int gen = 0; gen < max_iterations; ++gen) {
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t r1 = i, r2 = i;
            while (r1 == i) r1 = static_cast<std::size_t>(rng.uniform_int(0, population_size - 1));
            while (r2 == i || r2 == r1)
                r2 = static_cast<std::size_t>(rng.uniform_int(0, population_size - 1));
            const std::size_t forced = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(dim) - 1));
            for (std::size_t d = 0; d < dim; ++d) {
                if (d == forced || rng.uniform01() < kCrossover) {
                    double v = pop[i][d] + kWeight * (pop[best][d] - pop[i][d]) +
                               kWeight * (pop[r1][d] - pop[r2][d]);
                    trial[d] = std::clamp(v, lower[d], upper[d]);
                } else {
                    trial[d] = pop[i][d];
                }
            }
            const double f = objective(trial);
            if (f >= fit[i]) {
                pop[i] = trial;
                fit[i] = f;
                if (f > fit[best]) best = i;
            }
        }
        result.best_value_history.push_back(fit[best]);
    }
    result.best_point = pop[best];
    result.best_value = fit[best];
    return result;
}

}  // namespace banditfit
