#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "banditfit/optimizer.hpp"

using namespace banditfit;
using Catch::Approx;

TEST_CASE("differential evolution on smooth objectives") {
    SECTION("1-d") {
        auto obj = [](std::span<const double> x) { return -(x[0] - 0.3) * (x[0] - 0.3); };
        const std::vector<double> lo{0.0}, hi{1.0};
        const auto res = de_maximize(obj, lo, hi, 16, 60, 7);
        CHECK(res.best_point[0] == Approx(0.3).margin(1e-4));
        CHECK(res.best_value == Approx(0.0).margin(1e-8));
    }
    SECTION("2-d with optimum on the boundary") {
        auto obj = [](std::span<const double> x) { return x[0] - (x[1] - 0.7) * (x[1] - 0.7); };
        const std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
        const auto res = de_maximize(obj, lo, hi, 24, 80, 11);
        CHECK(res.best_point[0] == Approx(1.0).margin(1e-4));
        CHECK(res.best_point[1] == Approx(0.7).margin(1e-3));
    }
}

TEST_CASE("best value is non-decreasing across generations") {
    auto obj = [](std::span<const double> x) {
        return std::sin(13.0 * x[0]) + 0.5 * std::cos(29.0 * x[0]);
    };
    const std::vector<double> lo{0.0}, hi{1.0};
    const auto res = de_maximize(obj, lo, hi, 12, 40, 3);
    REQUIRE(res.best_value_history.size() == 40);
    for (std::size_t g = 1; g < res.best_value_history.size(); ++g)
        REQUIRE(res.best_value_history[g] >= res.best_value_history[g - 1]);
    CHECK(res.best_value == res.best_value_history.back());
}

TEST_CASE("seed determinism and bounds") {
    auto obj = [](std::span<const double> x) { return -std::abs(x[0] - 2.0); };
    const std::vector<double> lo{1.5}, hi{3.5};
    const auto a = de_maximize(obj, lo, hi, 8, 15, 99);
    const auto b = de_maximize(obj, lo, hi, 8, 15, 99);
    CHECK(a.best_point == b.best_point);
    CHECK(a.best_value == b.best_value);
    CHECK(a.best_point[0] >= 1.5);
    CHECK(a.best_point[0] <= 3.5);

    const auto c = de_maximize(obj, lo, hi, 8, 15, 100);
    CHECK((c.best_point != a.best_point || c.best_value == a.best_value));
}

TEST_CASE("argument validation") {
    auto obj = [](std::span<const double> x) { return x[0]; };
    const std::vector<double> lo{0.0}, hi{1.0}, bad{-1.0};
    CHECK_THROWS_AS(de_maximize(obj, lo, hi, 3, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(de_maximize(obj, lo, hi, 8, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(de_maximize(obj, hi, lo, 8, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(de_maximize(obj, {}, {}, 8, 10, 1), std::invalid_argument);
}
