#include <doctest.h>

#include "mmcount/pipeline.hpp"

using namespace mmcount;
using namespace mmcount::pipeline;

namespace {

synth::SceneSpec desk_scene(std::uint64_t seed, double duration_s = 10.0) {
    synth::SceneSpec spec;
    spec.n_persons = 3;
    spec.seats = {{-0.3, 0.5196}, {0.2903, 1.1644}, {0.9804, 1.5096}};
    spec.duration_s = duration_s;
    spec.noise_rate = 25;
    spec.points_per_person_min = 40;
    spec.points_per_person_max = 60;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("enhance preserves frame timeline and reports per window") {
    agent::HeuristicAgent agent;
    const auto scene = synth::generate_scene(desk_scene(0, 2.0), SensorSetup{});
    const auto result = enhance(scene.frames, agent, SensorSetup{}, ScenarioDescriptor{}, {});
    CHECK(result.frames.size() == scene.frames.size());
    for (std::size_t i = 0; i < result.frames.size(); ++i) {
        CHECK(result.frames[i].timestamp_ms == scene.frames[i].timestamp_ms);
    }
    CHECK(result.windows.size() == 10);  // 2 s / 200 ms
    for (const auto& w : result.windows) {
        CHECK(w.removal.kept + w.removal.dropped > 0);
    }
}

TEST_CASE("no-enhance passthrough keeps every point") {
    agent::HeuristicAgent agent;
    const auto scene = synth::generate_scene(desk_scene(1, 1.0), SensorSetup{});
    EnhanceConfig config;
    config.no_enhance = true;
    const auto result = enhance(scene.frames, agent, SensorSetup{}, ScenarioDescriptor{}, config);
    std::size_t in = 0, out = 0;
    for (const auto& f : scene.frames) in += f.points.size();
    for (const auto& f : result.frames) out += f.points.size();
    CHECK(in == out);
    CHECK(result.no_enhance);
}

TEST_CASE("detect on an empty capture returns a valid empty report") {
    agent::HeuristicAgent agent;
    const auto result = detect({}, agent, {});
    CHECK(result.windows.empty());
    const json doc = detections_json(result);
    CHECK(doc.at("windows").empty());
}

TEST_CASE("detections serialize and parse back") {
    agent::HeuristicAgent agent;
    const auto scene = synth::generate_scene(desk_scene(2, 2.0), SensorSetup{});
    const auto enhanced = enhance(scene.frames, agent, SensorSetup{}, ScenarioDescriptor{}, {});
    DetectConfig config;
    config.extent = scene.truth.extent;
    const auto result = detect(enhanced.frames, agent, config);
    const json doc = detections_json(result);
    const auto back = detections_from_json(doc);
    REQUIRE(back.windows.size() == result.windows.size());
    CHECK(back.lookback == result.lookback);
    for (std::size_t i = 0; i < result.windows.size(); ++i) {
        CHECK(back.windows[i].raw_count == result.windows[i].raw_count);
        CHECK(back.windows[i].smoothed_count == result.windows[i].smoothed_count);
        CHECK(back.windows[i].detections.size() == result.windows[i].detections.size());
    }
}

TEST_CASE("evaluate rejects mismatched extents") {
    agent::HeuristicAgent agent;
    const auto scene = synth::generate_scene(desk_scene(3, 1.0), SensorSetup{});
    DetectConfig config;
    config.extent = {-8, 8, 0, 16};
    const auto detections = detect(scene.frames, agent, config);
    CHECK_THROWS_AS(evaluate(detections, scene.truth, {}), MismatchedExtent);
}

TEST_CASE("full pipeline produces a populated evaluation report") {
    PipelineConfig config;
    config.scene = desk_scene(4, 20.0);
    config.eval.sample_every_s = 5.0;
    agent::HeuristicAgent agent;
    const auto result = run_pipeline(config, agent);
    CHECK(result.report.n_samples == 4);
    CHECK(result.report.game.count(0) == 1);
    CHECK(result.report.game.count(1) == 1);
    CHECK(result.report.accuracy >= 0.0);
    CHECK(result.report.accuracy <= 1.0);
    const json report = eval_report_json(result.report);
    CHECK(report.at("n_samples") == 4);
    CHECK(report.at("game").contains("1"));
}

TEST_CASE("identical pipeline runs are byte-identical with the heuristic agent") {
    PipelineConfig config;
    config.scene = desk_scene(5, 10.0);
    config.eval.sample_every_s = 5.0;
    agent::HeuristicAgent agent;
    const auto a = run_pipeline(config, agent);
    const auto b = run_pipeline(config, agent);
    CHECK(eval_report_json(a.report).dump() == eval_report_json(b.report).dump());
    CHECK(detections_json(a.detections).dump() == detections_json(b.detections).dump());
    CHECK(enhance_report_json(a.enhanced, agent.name()).dump() ==
          enhance_report_json(b.enhanced, agent.name()).dump());
}

TEST_CASE("trace records one entry per rollout when enabled") {
    PipelineConfig config;
    config.scene = desk_scene(6, 1.0);
    config.enhance.emit_trace = true;
    config.enhance.search.budget = 8;
    config.enhance.search.epsilon_stop = 0.0;
    agent::HeuristicAgent agent;
    const auto scene = synth::generate_scene(config.scene, SensorSetup{});
    const auto enhanced =
        enhance(scene.frames, agent, SensorSetup{}, ScenarioDescriptor{}, config.enhance);
    for (const auto& w : enhanced.windows) {
        CHECK(w.trace.rollouts.size() == 8);
        for (const auto& r : w.trace.rollouts) {
            CHECK(r.score.total >= 0.0);
            CHECK(r.score.total <= 1.0);
            CHECK_FALSE(r.path.empty());
            CHECK(r.path.front() == 0);
        }
    }
    const json doc = trace_json(enhanced);
    CHECK(doc.at("windows").size() == enhanced.windows.size());
}
