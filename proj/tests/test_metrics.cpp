#include <doctest.h>

#include "mmcount/metrics.hpp"
#include "mmcount/rng.hpp"
#include "oracles.hpp"

using namespace mmcount;
using namespace mmcount::metrics;

namespace {

Sample random_sample(rng::Engine& rng, const Extent2D& extent, int max_points) {
    Sample s;
    const auto np = rng.uniform_int(0, max_points);
    const auto nt = rng.uniform_int(0, max_points);
    for (int i = 0; i < np; ++i) {
        s.predicted.push_back({rng.uniform(extent.x_min, extent.x_max),
                               rng.uniform(extent.y_min, extent.y_max)});
    }
    for (int i = 0; i < nt; ++i) {
        s.truth.push_back({rng.uniform(extent.x_min, extent.x_max),
                           rng.uniform(extent.y_min, extent.y_max)});
    }
    return s;
}

}  // namespace

TEST_CASE("identical prediction and truth score zero at any level") {
    rng::Engine rng(71);
    const Extent2D extent{-3, 3, 0, 6};
    for (int level = 0; level <= 3; ++level) {
        Sample s;
        for (int i = 0; i < 7; ++i) {
            const Position p{rng.uniform(-3, 3), rng.uniform(0, 6)};
            s.predicted.push_back(p);
            s.truth.push_back(p);
        }
        CHECK(game({s}, extent, level) == 0.0);
    }
}

TEST_CASE("GAME at level 0 equals the count MAE exactly") {
    rng::Engine rng(72);
    const Extent2D extent{-3, 3, 0, 6};
    std::vector<Sample> samples;
    std::vector<int> pred, truth;
    for (int i = 0; i < 30; ++i) {
        samples.push_back(random_sample(rng, extent, 10));
        pred.push_back(static_cast<int>(samples.back().predicted.size()));
        truth.push_back(static_cast<int>(samples.back().truth.size()));
    }
    const auto counting = counting_accuracy(pred, truth);
    CHECK(game(samples, extent, 0) == doctest::Approx(counting.mae).epsilon(1e-12));
}

TEST_CASE("hand-built quadrant example scores 2") {
    // One sample, L=1: per-quadrant pred [2,1,0,3] vs gt [1,1,1,3].
    const Extent2D extent{0, 2, 0, 2};
    Sample s;
    auto put = [&](std::vector<Position>& v, double x, double y, int n) {
        for (int i = 0; i < n; ++i) v.push_back({x, y});
    };
    put(s.predicted, 0.5, 0.5, 2);
    put(s.predicted, 1.5, 0.5, 1);
    put(s.predicted, 0.5, 1.5, 0);
    put(s.predicted, 1.5, 1.5, 3);
    put(s.truth, 0.5, 0.5, 1);
    put(s.truth, 1.5, 0.5, 1);
    put(s.truth, 0.5, 1.5, 1);
    put(s.truth, 1.5, 1.5, 3);
    CHECK(game({s}, extent, 1) == doctest::Approx(2.0));
}

TEST_CASE("game matches the naive double-loop oracle on random instances") {
    rng::Engine rng(73);
    const Extent2D extent{-3, 3, 0, 6};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Sample> samples;
        const auto n = rng.uniform_int(1, 5);
        for (int i = 0; i < n; ++i) samples.push_back(random_sample(rng, extent, 10));
        const int level = static_cast<int>(rng.uniform_int(0, 3));
        CHECK(game(samples, extent, level) == oracles::naive_game(samples, extent, level));
    }
}

TEST_CASE("GAME is monotone in the division level") {
    rng::Engine rng(74);
    const Extent2D extent{-3, 3, 0, 6};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Sample> samples;
        const auto n = rng.uniform_int(1, 4);
        for (int i = 0; i < n; ++i) samples.push_back(random_sample(rng, extent, 12));
        double last = game(samples, extent, 0);
        for (int level = 1; level <= 3; ++level) {
            const double next = game(samples, extent, level);
            CHECK(next >= last - 1e-12);
            last = next;
        }
    }
}

TEST_CASE("counting accuracy and MAE") {
    const auto all = counting_accuracy({3, 3, 3}, {3, 3, 3});
    CHECK(all.accuracy == 1.0);
    CHECK(all.mae == 0.0);
    const auto mixed = counting_accuracy({3, 3, 4}, {3, 3, 3});
    CHECK(mixed.accuracy == doctest::Approx(2.0 / 3));
    CHECK(mixed.mae == doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(counting_accuracy({}, {}), InputError);
    CHECK_THROWS_AS(counting_accuracy({1}, {1, 2}), InputError);
}

TEST_CASE("game validates inputs") {
    CHECK_THROWS_AS(game({}, {0, 1, 0, 1}, 1), InputError);
    CHECK_THROWS_AS(game({Sample{}}, {0, 1, 0, 1}, -1), InputError);
    CHECK_THROWS_AS(game({Sample{}}, {1, 1, 0, 1}, 1), MismatchedExtent);
}
