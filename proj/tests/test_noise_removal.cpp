#include <doctest.h>

#include "mmcount/noise_removal.hpp"
#include "mmcount/rng.hpp"
#include "mmcount/synth.hpp"

using namespace mmcount;
using namespace mmcount::noise_removal;

namespace {

/// Agent wrapper forcing a fixed mask reply.
class FixedMaskAgent final : public agent::Agent {
public:
    explicit FixedMaskAgent(bool keep) : keep_(keep) {}
    std::string name() const override { return "fixed"; }
    agent::NoiseMask classify_noise(const agent::TokenSequence& seq) override {
        agent::NoiseMask mask;
        mask.keep.assign(seq.encoded_points(), keep_);
        mask.confidence.assign(seq.encoded_points(), 1.0);
        return mask;
    }
    std::vector<compensation::CompensationStrategy> propose_strategies(
        const compensation::CompensationStateSummary&, int) override {
        return {compensation::CompensationStrategy{}};
    }
    std::vector<Detection> detect_crowd(const std::vector<std::uint8_t>&,
                                        const heatmap::Heatmap&) override {
        return {};
    }

private:
    bool keep_;
};

/// Replies with a wrong-length mask to force the heuristic fallback.
class BrokenAgent final : public agent::Agent {
public:
    std::string name() const override { return "broken"; }
    agent::NoiseMask classify_noise(const agent::TokenSequence& seq) override {
        agent::NoiseMask mask;
        mask.keep.assign(seq.encoded_points() + 2, true);
        mask.confidence.assign(seq.encoded_points() + 2, 1.0);
        return mask;
    }
    std::vector<compensation::CompensationStrategy> propose_strategies(
        const compensation::CompensationStateSummary&, int) override {
        return {compensation::CompensationStrategy{}};
    }
    std::vector<Detection> detect_crowd(const std::vector<std::uint8_t>&,
                                        const heatmap::Heatmap&) override {
        return {};
    }
};

CloudWindow scene_window(std::uint64_t seed) {
    synth::SceneSpec spec;
    spec.n_persons = 3;
    spec.seats = {{-0.3, 0.5196}, {0.2903, 1.1644}, {0.9804, 1.5096}};
    spec.duration_s = 0.2;
    spec.frame_rate = 10;
    spec.noise_rate = 25;
    spec.points_per_person_min = 30;
    spec.points_per_person_max = 40;
    spec.seed = seed;
    const auto scene = synth::generate_scene(spec, SensorSetup{});
    return CloudWindow{0, 200, scene.frames};
}

}  // namespace

TEST_CASE("an all-true mask returns the input unchanged") {
    const auto window = scene_window(0);
    FixedMaskAgent agent(true);
    const auto result = remove_noise(window, agent, SensorSetup{}, ScenarioDescriptor{});
    CHECK(result.report.dropped == 0);
    CHECK(result.report.kept == window.point_count());
    REQUIRE(result.window.frames.size() == window.frames.size());
    for (std::size_t i = 0; i < window.frames.size(); ++i) {
        CHECK(result.window.frames[i].points.size() == window.frames[i].points.size());
    }
}

TEST_CASE("an all-false mask empties every frame but keeps the structure") {
    const auto window = scene_window(1);
    FixedMaskAgent agent(false);
    const auto result = remove_noise(window, agent, SensorSetup{}, ScenarioDescriptor{});
    CHECK(result.report.kept == 0);
    CHECK(result.report.dropped == window.point_count());
    REQUIRE(result.window.frames.size() == window.frames.size());
    for (const auto& frame : result.window.frames) CHECK(frame.points.empty());
}

TEST_CASE("point conservation and order preservation hold always") {
    rng::Engine rng(51);
    agent::HeuristicAgent agent;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto window = scene_window(seed);
        const auto result = remove_noise(window, agent, SensorSetup{}, ScenarioDescriptor{});
        CHECK(result.report.kept + result.report.dropped == window.point_count());
        CHECK(result.window.point_count() == result.report.kept);
        // kept points appear in their original relative order
        for (std::size_t fi = 0; fi < window.frames.size(); ++fi) {
            std::size_t cursor = 0;
            const auto& kept = result.window.frames[fi].points;
            for (const auto& p : window.frames[fi].points) {
                if (cursor < kept.size() && kept[cursor].x == p.x && kept[cursor].y == p.y &&
                    kept[cursor].energy == p.energy) {
                    ++cursor;
                }
            }
            CHECK(cursor == kept.size());
        }
    }
    (void)rng;
}

TEST_CASE("heuristic removal separates labeled noise from person points") {
    // Ground-truth labels come from the generator; measured over seeds 0..9
    // the heuristic must drop >= 80% of injected noise and <= 10% of person
    // points.
    std::size_t noise_total = 0, noise_dropped = 0, person_total = 0, person_dropped = 0;
    agent::HeuristicAgent agent;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        synth::SceneSpec spec;
        spec.n_persons = 3;
        spec.seats = {{-0.3, 0.5196}, {0.2903, 1.1644}, {0.9804, 1.5096}};
        spec.duration_s = 0.2;
        spec.noise_rate = 25;
        spec.points_per_person_min = 30;
        spec.points_per_person_max = 40;
        spec.seed = seed;
        const auto scene = synth::generate_scene(spec, SensorSetup{});
        const CloudWindow window{0, 200, scene.frames};
        const auto result = remove_noise(window, agent, SensorSetup{}, ScenarioDescriptor{});

        // Rebuild the kept set per frame by pointer-free matching on order:
        // kept points are a subsequence, so walk both lists in lockstep.
        for (std::size_t fi = 0; fi < window.frames.size(); ++fi) {
            const auto& original = window.frames[fi].points;
            const auto& labels = scene.truth.frames[fi].noise_labels;
            const auto& kept = result.window.frames[fi].points;
            std::size_t cursor = 0;
            for (std::size_t pi = 0; pi < original.size(); ++pi) {
                const bool was_kept = cursor < kept.size() &&
                                      kept[cursor].x == original[pi].x &&
                                      kept[cursor].y == original[pi].y &&
                                      kept[cursor].energy == original[pi].energy;
                if (was_kept) ++cursor;
                if (labels[pi]) {
                    ++noise_total;
                    if (!was_kept) ++noise_dropped;
                } else {
                    ++person_total;
                    if (!was_kept) ++person_dropped;
                }
            }
        }
    }
    CHECK(static_cast<double>(noise_dropped) >= 0.8 * static_cast<double>(noise_total));
    CHECK(static_cast<double>(person_dropped) <= 0.1 * static_cast<double>(person_total));
}

TEST_CASE("malformed agent replies fall back to the heuristic and flag the report") {
    const auto window = scene_window(2);
    BrokenAgent broken;
    const auto result = remove_noise(window, broken, SensorSetup{}, ScenarioDescriptor{});
    CHECK(result.report.fallback_used);
    CHECK(result.report.kept + result.report.dropped == window.point_count());

    agent::HeuristicAgent heuristic;
    const auto direct = remove_noise(window, heuristic, SensorSetup{}, ScenarioDescriptor{});
    CHECK(result.report.kept == direct.report.kept);
}

TEST_CASE("empty windows flow through") {
    agent::HeuristicAgent agent;
    const auto result =
        remove_noise(CloudWindow{0, 200, {}}, agent, SensorSetup{}, ScenarioDescriptor{});
    CHECK(result.report.kept == 0);
    CHECK(result.report.dropped == 0);
    CHECK(result.window.frames.empty());
}
