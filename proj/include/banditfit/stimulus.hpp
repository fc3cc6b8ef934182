#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditfit/rng.hpp"

namespace banditfit {

enum class Shape { circle, square };
enum class Pattern { striped, plain };
enum class ObjectSize { small, big };
enum class Color { red, blue };
enum class Category { A, B };

inline const char* to_string(Shape v) { return v == Shape::circle ? "circle" : "square"; }
inline const char* to_string(Pattern v) { return v == Pattern::striped ? "striped" : "plain"; }
inline const char* to_string(ObjectSize v) { return v == ObjectSize::small ? "small" : "big"; }
inline const char* to_string(Color v) { return v == Color::red ? "red" : "blue"; }
inline const char* to_string(Category v) { return v == Category::A ? "A" : "B"; }

struct StimulusObject {
    int id = 0;
    Shape shape = Shape::circle;
    Pattern pattern = Pattern::striped;
    ObjectSize size = ObjectSize::small;
    Color color = Color::red;
    Category category = Category::A;
};

// The context space of a categorization task: objects identified by 1-based
// consecutive ids, plus the number of available actions.
struct StimulusSet {
    std::vector<StimulusObject> objects;
    int action_count = 2;

    const StimulusObject& object(int id) const {
        if (id < 1 || id > static_cast<int>(objects.size()))
            throw std::invalid_argument("StimulusSet: unknown object id " + std::to_string(id));
        return objects[static_cast<std::size_t>(id - 1)];
    }
};

enum class ScheduleKind { cyclic, shuffled_blocks };

struct ContextSchedule {
    ScheduleKind kind = ScheduleKind::cyclic;
    std::uint64_t seed = 0;
    int horizon = 500;
};

// The nine-object, two-category set (5 A's / 4 B's over four binary
// attributes). Only shape, pattern, id and category drive partitions and
// rewards; size and color are descriptive labels.
inline StimulusSet build_five_four_set() {
    using S = Shape;
    using P = Pattern;
    using Z = ObjectSize;
    using C = Color;
    using K = Category;
    StimulusSet set;
    set.action_count = 2;
    set.objects = {
        {1, S::circle, P::striped, Z::small, C::blue, K::A},
        {2, S::circle, P::striped, Z::big, C::blue, K::A},
        {3, S::circle, P::striped, Z::small, C::red, K::A},
        {4, S::circle, P::plain, Z::small, C::red, K::B},
        {5, S::circle, P::plain, Z::big, C::red, K::A},
        {6, S::square, P::striped, Z::small, C::red, K::B},
        {7, S::square, P::striped, Z::big, C::red, K::A},
        {8, S::square, P::plain, Z::big, C::blue, K::B},
        {9, S::square, P::plain, Z::small, C::blue, K::B},
    };
    return set;
}

// Reward 1 when the 1-based action (1 = A, 2 = B) names the object's
// category, 0 otherwise.
inline double categorization_reward(const StimulusObject& object, int action) {
    if (action < 1 || action > 2)
        throw std::invalid_argument("categorization_reward: action out of range");
    const Category chosen = (action == 1) ? Category::A : Category::B;
    return chosen == object.category ? 1.0 : 0.0;
}

// Context-id sequence of length schedule.horizon. Cyclic: fixed order
// 1..m repeated. Shuffled blocks: concatenated seeded permutations of 1..m
// (last block truncated). Either way per-object counts over the horizon
// differ from horizon/m by at most 1.
inline std::vector<int> generate_context_sequence(const StimulusSet& set,
                                                  const ContextSchedule& schedule) {
    const int m = static_cast<int>(set.objects.size());
    if (m == 0) throw std::invalid_argument("generate_context_sequence: empty stimulus set");
    if (schedule.horizon < 1)
        throw std::invalid_argument("generate_context_sequence: horizon must be >= 1");

    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(schedule.horizon));
    if (schedule.kind == ScheduleKind::cyclic) {
        for (int t = 1; t <= schedule.horizon; ++t) out.push_back((t - 1) % m + 1);
        return out;
    }
    Rng rng(schedule.seed);
    std::vector<int> block(static_cast<std::size_t>(m));
    while (static_cast<int>(out.size()) < schedule.horizon) {
        for (int i = 0; i < m; ++i) block[static_cast<std::size_t>(i)] = i + 1;
        shuffle(block, rng);
        for (int id : block) {
            if (static_cast<int>(out.size()) == schedule.horizon) break;
            out.push_back(id);
        }
    }
    return out;
}

// objects.csv: id,shape,pattern,size,color,category
inline void write_objects_csv(const StimulusSet& set, std::ostream& out) {
    out << "id,shape,pattern,size,color,category\n";
    for (const auto& o : set.objects) {
        out << o.id << ',' << to_string(o.shape) << ',' << to_string(o.pattern) << ','
            << to_string(o.size) << ',' << to_string(o.color) << ',' << to_string(o.category)
            << '\n';
    }
}

}  // namespace banditfit
