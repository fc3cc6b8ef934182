#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace banditfit {

// splitmix64 finalizer. Used to derive independent sub-seeds from a master
// seed so that campaigns are reproducible piecemeal (per agent, per cell).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: folds a tag string and an index into the
// master seed (FNV-1a), then finalizes with splitmix64.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ master;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    for (unsigned char c : tag) mix(c);
    mix(0xffULL);
    for (int i = 0; i < 8; ++i) mix((index >> (8 * i)) & 0xffULL);
    return splitmix64(h);
}

// Seeded generator with a fixed uniform-to-double mapping, so that the same
// seed produces the same stream on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive bounds. Modulo bias is negligible for the small ranges used here.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
        std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % range);
    }

    // Samples a 0-based index from a probability vector by inverse CDF.
    int sample(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("sample: empty distribution");
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 gen_;
};

// In-place Fisher-Yates shuffle driven by Rng (std::shuffle is
// implementation-defined, which would break byte-identical reruns).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
        const int j = rng.uniform_int(0, i);
        std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
    }
}

}  // namespace banditfit
