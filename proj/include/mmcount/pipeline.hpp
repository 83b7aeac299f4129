#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmcount/agent.hpp"
#include "mmcount/detection.hpp"
#include "mmcount/ingestion.hpp"
#include "mmcount/json_io.hpp"
#include "mmcount/mcts.hpp"
#include "mmcount/noise_removal.hpp"
#include "mmcount/synth.hpp"

namespace mmcount::pipeline {

struct EnhanceConfig {
    bool swap_order = false;   // compensate before removing noise (ablation)
    bool no_enhance = false;   // passthrough (ablation)
    bool emit_trace = false;
    double window_ms = 200.0;
    mcts::SearchConfig search;
};

struct WindowEnhancement {
    double start_ms = 0.0;
    noise_removal::RemovalReport removal;
    std::optional<compensation::CompensationStrategy> strategy;
    compensation::ScoreBreakdown score;
    mcts::SearchTrace trace;  // populated only when emit_trace
};

struct EnhanceResult {
    std::vector<Frame> frames;
    std::vector<WindowEnhancement> windows;
    bool swap_order = false;
    bool no_enhance = false;
};

/// Per fixed window: noise removal then MCTS-compensated gain (default
/// order), or the swapped/passthrough ablations. Windows run in parallel.
EnhanceResult enhance(const std::vector<Frame>& frames, agent::Agent& agent,
                      const SensorSetup& setup, const ScenarioDescriptor& scenario,
                      const EnhanceConfig& config);

struct DetectConfig {
    double window_ms = 200.0;
    double stride_ms = 100.0;
    kernels::GridShape grid{64, 64};
    kernels::Extent2D extent{-3.0, 3.0, 0.0, 6.0};
};

struct WindowDetections {
    double window_start_ms = 0.0;
    int raw_count = 0;
    int smoothed_count = 0;
    std::vector<Detection> detections;
};

struct DetectResult {
    DetectConfig config;
    int lookback = 1;
    std::vector<WindowDetections> windows;
};

/// Sliding-window heatmaps, per-window detections, and count smoothing.
/// An empty capture yields a valid empty report.
DetectResult detect(const std::vector<Frame>& frames, agent::Agent& agent,
                    const DetectConfig& config);

struct EvalConfig {
    std::vector<int> levels{0, 1, 2};
    double sample_every_s = 10.0;
};

struct EvalReport {
    std::map<int, double> game;  // level -> value
    double accuracy = 0.0;
    double mae = 0.0;
    int n_samples = 0;
    std::vector<std::string> warnings;
};

/// Sample detection windows at the protocol ticks and score them against
/// ground truth. Throws MismatchedExtent when detection and truth extents
/// disagree.
EvalReport evaluate(const DetectResult& detections, const synth::GroundTruth& truth,
                    const EvalConfig& config);

json enhance_report_json(const EnhanceResult& result, const std::string& agent_name);
json trace_json(const EnhanceResult& result);
json detections_json(const DetectResult& result);
json eval_report_json(const EvalReport& report);
DetectResult detections_from_json(const json& doc);

struct PipelineConfig {
    synth::SceneSpec scene;
    EnhanceConfig enhance;
    DetectConfig detect;
    EvalConfig eval;
    SensorSetup setup;
    ScenarioDescriptor scenario;
};

struct PipelineResult {
    synth::Scene scene;
    EnhanceResult enhanced;
    DetectResult detections;
    EvalReport report;
};

/// synth -> enhance -> detect -> eval in one run. The detect extent is
/// forced to the scene region so evaluation extents always match.
PipelineResult run_pipeline(const PipelineConfig& config, agent::Agent& agent);

}  // namespace mmcount::pipeline
