#include "mmcount/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "mmcount/heatmap.hpp"
#include "mmcount/metrics.hpp"

namespace mmcount::pipeline {

namespace {

WindowEnhancement enhance_window(const CloudWindow& window, agent::Agent& agent,
                                 const SensorSetup& setup, const ScenarioDescriptor& scenario,
                                 const EnhanceConfig& config, CloudWindow& out) {
    WindowEnhancement we;
    we.start_ms = window.start_ms;
    if (config.no_enhance) {
        out = window;
        we.removal.kept = window.point_count();
        return we;
    }

    CloudWindow current = window;
    if (!config.swap_order) {
        auto removal = noise_removal::remove_noise(current, agent, setup, scenario);
        we.removal = removal.report;
        current = std::move(removal.window);
    }

    auto search = mcts::run_search(current, agent, setup, scenario, config.search);
    we.strategy = search.strategy;
    we.score = search.score;
    if (config.emit_trace) we.trace = std::move(search.trace);
    if (search.strategy) {
        current = compensation::apply_strategy(current, *search.strategy, setup);
    }

    if (config.swap_order) {
        auto removal = noise_removal::remove_noise(current, agent, setup, scenario);
        we.removal = removal.report;
        current = std::move(removal.window);
    }
    out = std::move(current);
    return we;
}

}  // namespace

EnhanceResult enhance(const std::vector<Frame>& frames, agent::Agent& agent,
                      const SensorSetup& setup, const ScenarioDescriptor& scenario,
                      const EnhanceConfig& config) {
    EnhanceResult result;
    result.swap_order = config.swap_order;
    result.no_enhance = config.no_enhance;
    if (frames.empty()) return result;

    const auto windows = ingestion::window_fixed(frames, config.window_ms);
    std::vector<CloudWindow> cleaned(windows.size());
    result.windows.resize(windows.size());

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(windows.size()); ++i) {
        try {
            result.windows[static_cast<std::size_t>(i)] =
                enhance_window(windows[static_cast<std::size_t>(i)], agent, setup, scenario,
                               config, cleaned[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (const auto& window : cleaned) {
        for (const auto& frame : window.frames) result.frames.push_back(frame);
    }
    return result;
}

DetectResult detect(const std::vector<Frame>& frames, agent::Agent& agent,
                    const DetectConfig& config) {
    DetectResult result;
    result.config = config;
    result.lookback = detection::smoothing_lookback(config.window_ms, config.stride_ms);
    if (frames.empty()) return result;

    const auto windows = ingestion::window_sliding(frames, config.window_ms, config.stride_ms);
    result.windows.resize(windows.size());

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(windows.size()); ++i) {
        try {
            const auto& window = windows[static_cast<std::size_t>(i)];
            auto& out = result.windows[static_cast<std::size_t>(i)];
            out.window_start_ms = window.start_ms;
            const auto hm = heatmap::build(window, config.extent, config.grid);
            out.detections = detection::detect_window(hm, agent);
            out.raw_count = static_cast<int>(out.detections.size());
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<int> raw;
    raw.reserve(result.windows.size());
    for (const auto& w : result.windows) raw.push_back(w.raw_count);
    const auto smoothed = detection::smooth_counts(raw, result.lookback);
    for (std::size_t i = 0; i < result.windows.size(); ++i) {
        result.windows[i].smoothed_count = smoothed[i];
    }
    return result;
}

EvalReport evaluate(const DetectResult& detections, const synth::GroundTruth& truth,
                    const EvalConfig& config) {
    const auto& extent = detections.config.extent;
    const auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
    if (!near(extent.x_min, truth.extent.x_min) || !near(extent.x_max, truth.extent.x_max) ||
        !near(extent.y_min, truth.extent.y_min) || !near(extent.y_max, truth.extent.y_max)) {
        throw MismatchedExtent("detection extent does not match ground-truth extent");
    }
    if (truth.frames.empty()) throw EmptyCapture();

    EvalReport report;
    std::vector<metrics::Sample> samples;
    std::vector<int> pred_counts, truth_counts;

    const double t_first = truth.frames.front().timestamp_ms;
    const double t_last = truth.frames.back().timestamp_ms;
    const double frame_period_s = truth.frame_rate > 0 ? 1.0 / truth.frame_rate : 0.0;
    const double session_s = (t_last - t_first) / 1000.0 + frame_period_s;
    const auto ticks =
        static_cast<std::int64_t>(std::floor(session_s / config.sample_every_s + 1e-9));
    for (std::int64_t i = 0; i < ticks; ++i) {
        const double tick_ms = t_first + static_cast<double>(i) * config.sample_every_s * 1000.0;
        // Detection window starting at the tick; fall back to the latest
        // window at or before it.
        const WindowDetections* window = nullptr;
        for (const auto& w : detections.windows) {
            if (w.window_start_ms <= tick_ms + 1e-9) {
                window = &w;
            } else {
                break;
            }
        }
        if (window == nullptr) {
            report.warnings.push_back("no detection window at tick " + std::to_string(tick_ms) +
                                      " ms; sample skipped");
            continue;
        }
        // Ground-truth positions at the tick: the last frame at or before it.
        const synth::GroundTruthFrame* gt_frame = &truth.frames.front();
        for (const auto& f : truth.frames) {
            if (f.timestamp_ms <= tick_ms + 1e-9) gt_frame = &f;
        }

        metrics::Sample sample;
        for (const auto& d : window->detections) sample.predicted.push_back({d.x, d.y});
        for (const auto& s : gt_frame->persons) sample.truth.push_back({s.x, s.y});
        samples.push_back(std::move(sample));
        pred_counts.push_back(window->smoothed_count);
        truth_counts.push_back(static_cast<int>(gt_frame->persons.size()));
    }

    if (samples.empty()) throw InputError("evaluate: no evaluation samples");
    for (int level : config.levels) {
        report.game[level] = metrics::game(samples, extent, level);
    }
    const auto counting = metrics::counting_accuracy(pred_counts, truth_counts);
    report.accuracy = counting.accuracy;
    report.mae = counting.mae;
    report.n_samples = static_cast<int>(samples.size());
    return report;
}

json enhance_report_json(const EnhanceResult& result, const std::string& agent_name) {
    json doc;
    doc["agent"] = agent_name;
    doc["swap_order"] = result.swap_order;
    doc["no_enhance"] = result.no_enhance;
    auto& windows = doc["windows"] = json::array();
    for (const auto& w : result.windows) {
        json jw;
        jw["start_ms"] = w.start_ms;
        jw["removal"] = {{"kept", w.removal.kept},
                         {"dropped", w.removal.dropped},
                         {"mean_confidence", w.removal.mean_confidence},
                         {"fallback_used", w.removal.fallback_used},
                         {"truncated_dropped", w.removal.truncated_dropped}};
        if (w.strategy) {
            jw["strategy"] = *w.strategy;
            jw["score"] = w.score;
        } else {
            jw["strategy"] = nullptr;
        }
        windows.push_back(std::move(jw));
    }
    return doc;
}

json trace_json(const EnhanceResult& result) {
    json doc;
    auto& windows = doc["windows"] = json::array();
    for (const auto& w : result.windows) {
        json jw;
        jw["start_ms"] = w.start_ms;
        jw["termination"] = w.trace.termination;
        auto& rollouts = jw["rollouts"] = json::array();
        for (const auto& r : w.trace.rollouts) {
            json jr;
            jr["rollout"] = r.rollout;
            jr["path"] = r.path;
            jr["node"] = r.simulated_node;
            if (r.strategy) jr["strategy"] = *r.strategy;
            jr["e"] = r.score.effectiveness;
            jr["a"] = r.score.accuracy;
            jr["s"] = r.score.stability;
            jr["w"] = r.score.total;
            rollouts.push_back(std::move(jr));
        }
        windows.push_back(std::move(jw));
    }
    return doc;
}

json detections_json(const DetectResult& result) {
    json doc;
    doc["window_ms"] = result.config.window_ms;
    doc["stride_ms"] = result.config.stride_ms;
    doc["grid"] = {{"rows", result.config.grid.rows}, {"cols", result.config.grid.cols}};
    doc["extent"] = {{"x_min", result.config.extent.x_min},
                     {"x_max", result.config.extent.x_max},
                     {"y_min", result.config.extent.y_min},
                     {"y_max", result.config.extent.y_max}};
    doc["smoothing_lookback"] = result.lookback;
    auto& windows = doc["windows"] = json::array();
    for (const auto& w : result.windows) {
        json jw;
        jw["window_start_ms"] = w.window_start_ms;
        jw["raw_count"] = w.raw_count;
        jw["smoothed_count"] = w.smoothed_count;
        jw["detections"] = w.detections;
        windows.push_back(std::move(jw));
    }
    return doc;
}

DetectResult detections_from_json(const json& doc) {
    DetectResult result;
    try {
        result.config.window_ms = doc.at("window_ms").get<double>();
        result.config.stride_ms = doc.at("stride_ms").get<double>();
        result.config.grid = {doc.at("grid").at("rows").get<int>(),
                              doc.at("grid").at("cols").get<int>()};
        const auto& je = doc.at("extent");
        result.config.extent = {je.at("x_min").get<double>(), je.at("x_max").get<double>(),
                                je.at("y_min").get<double>(), je.at("y_max").get<double>()};
        result.lookback = doc.value("smoothing_lookback", 1);
        for (const auto& jw : doc.at("windows")) {
            WindowDetections w;
            w.window_start_ms = jw.at("window_start_ms").get<double>();
            w.raw_count = jw.at("raw_count").get<int>();
            w.smoothed_count = jw.at("smoothed_count").get<int>();
            for (const auto& jd : jw.at("detections")) w.detections.push_back(jd.get<Detection>());
            result.windows.push_back(std::move(w));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid detections document: ") + e.what());
    }
    return result;
}

json eval_report_json(const EvalReport& report) {
    json doc;
    auto& game = doc["game"] = json::object();
    for (const auto& [level, value] : report.game) {
        game[std::to_string(level)] = value;
    }
    doc["accuracy"] = report.accuracy;
    doc["mae"] = report.mae;
    doc["n_samples"] = report.n_samples;
    if (!report.warnings.empty()) doc["warnings"] = report.warnings;
    return doc;
}

PipelineResult run_pipeline(const PipelineConfig& config, agent::Agent& agent) {
    PipelineResult result;
    result.scene = synth::generate_scene(config.scene, config.setup);
    result.enhanced = enhance(result.scene.frames, agent, config.setup, config.scenario,
                              config.enhance);
    DetectConfig detect_config = config.detect;
    detect_config.extent = config.scene.region;
    result.detections = detect(result.enhanced.frames, agent, detect_config);
    result.report = evaluate(result.detections, result.scene.truth, config.eval);
    return result;
}

}  // namespace mmcount::pipeline
