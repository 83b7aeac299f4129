// Command-line front end: synth | enhance | detect | eval | pipeline.
// All reports are JSON under --out; exit codes: 0 ok, 2 input error,
// 3 agent unavailable, 4 internal invariant violation.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mmcount/agent.hpp"
#include "mmcount/heatmap.hpp"
#include "mmcount/json_io.hpp"
#include "mmcount/pipeline.hpp"
#include "mmcount/png.hpp"

namespace fs = std::filesystem;
using mmcount::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOptions {
    std::string out_dir;
    std::string config_file;
    std::string agent_kind = "heuristic";
    std::string agent_url;
    int jobs = 0;
};

struct StageClock {
    using clock = std::chrono::steady_clock;
    clock::time_point start = clock::now();

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(clock::now() - start).count();
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mmcount::InputError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mmcount::InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw mmcount::InputError("invalid JSON in " + path + ": " + e.what());
    }
}

std::shared_ptr<mmcount::agent::Agent> pick_agent(const CommonOptions& common) {
    // Env overrides flags so operators can redirect a scripted run.
    if (const char* env = std::getenv("MMCOUNT_AGENT_URL")) {
        return mmcount::agent::make_agent(env);
    }
    if (common.agent_kind == "remote") {
        if (common.agent_url.empty()) {
            throw mmcount::InputError("--agent remote requires --agent-url or MMCOUNT_AGENT_URL");
        }
        return mmcount::agent::make_agent(common.agent_url);
    }
    return std::make_shared<mmcount::agent::HeuristicAgent>();
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

mmcount::kernels::Extent2D parse_extent(const std::string& text) {
    mmcount::kernels::Extent2D extent;
    std::istringstream in(text);
    char c1, c2, c3;
    if (!(in >> extent.x_min >> c1 >> extent.x_max >> c2 >> extent.y_min >> c3 >>
          extent.y_max) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
        throw mmcount::InputError("extent must be x_min,x_max,y_min,y_max");
    }
    return extent;
}

mmcount::kernels::GridShape parse_grid(const std::string& text) {
    mmcount::kernels::GridShape grid;
    std::istringstream in(text);
    char x;
    if (!(in >> grid.rows >> x >> grid.cols) || x != 'x' || grid.rows < 1 || grid.cols < 1) {
        throw mmcount::InputError("grid must be ROWSxCOLS, e.g. 64x64");
    }
    return grid;
}

mmcount::compensation::ScoreWeights parse_weights(const std::string& text) {
    mmcount::compensation::ScoreWeights w;
    std::istringstream in(text);
    char c1, c2;
    if (!(in >> w.effectiveness >> c1 >> w.accuracy >> c2 >> w.stability) || c1 != ',' ||
        c2 != ',') {
        throw mmcount::InputError("weights must be e,a,s");
    }
    if (!w.valid(1e-6)) throw mmcount::InputError("weights must be >= 0 and sum to 1");
    return w;
}

/// Config file mirrors module defaults; flags override file values.
void merge_config_file(const std::string& path, mmcount::pipeline::EnhanceConfig& enhance,
                       mmcount::pipeline::DetectConfig& detect,
                       mmcount::pipeline::EvalConfig& eval) {
    if (path.empty()) return;
    const json doc = load_json(path);
    enhance.window_ms = doc.value("window_ms", enhance.window_ms);
    detect.window_ms = doc.value("window_ms", detect.window_ms);
    detect.stride_ms = doc.value("stride_ms", detect.stride_ms);
    if (doc.contains("grid")) {
        detect.grid = {doc["grid"].value("rows", detect.grid.rows),
                       doc["grid"].value("cols", detect.grid.cols)};
    }
    if (doc.contains("extent")) {
        const auto& je = doc["extent"];
        detect.extent = {je.value("x_min", detect.extent.x_min),
                         je.value("x_max", detect.extent.x_max),
                         je.value("y_min", detect.extent.y_min),
                         je.value("y_max", detect.extent.y_max)};
    }
    if (doc.contains("mcts")) {
        const auto& jm = doc["mcts"];
        enhance.search.budget = jm.value("budget", enhance.search.budget);
        enhance.search.max_depth = jm.value("max_depth", enhance.search.max_depth);
        enhance.search.exploration_c = jm.value("c", enhance.search.exploration_c);
        enhance.search.children_per_node = jm.value("k", enhance.search.children_per_node);
        enhance.search.patience = jm.value("patience", enhance.search.patience);
        enhance.search.epsilon_stop = jm.value("epsilon_stop", enhance.search.epsilon_stop);
    }
    if (doc.contains("weights")) {
        const auto w = doc["weights"].get<std::vector<double>>();
        if (w.size() == 3) {
            enhance.search.weights = {w[0], w[1], w[2]};
        }
    }
    if (doc.contains("levels")) eval.levels = doc["levels"].get<std::vector<int>>();
    eval.sample_every_s = doc.value("sample_every_s", eval.sample_every_s);
}

json search_config_json(const mmcount::mcts::SearchConfig& s) {
    return json{{"budget", s.budget},
                {"max_depth", s.max_depth},
                {"c", s.exploration_c},
                {"k", s.children_per_node},
                {"patience", s.patience},
                {"epsilon_stop", s.epsilon_stop},
                {"stability_splits", s.stability_splits},
                {"weights",
                 {s.weights.effectiveness, s.weights.accuracy, s.weights.stability}}};
}

struct CaptureBundle {
    std::vector<mmcount::Frame> frames;
    mmcount::SensorSetup setup;
    mmcount::ScenarioDescriptor scenario;
};

CaptureBundle load_capture(const std::string& path, const std::string& meta_path,
                           bool allow_empty = false) {
    CaptureBundle bundle;
    if (!meta_path.empty()) {
        const json meta = load_json(meta_path);
        if (meta.contains("setup")) bundle.setup = meta["setup"].get<mmcount::SensorSetup>();
        if (meta.contains("scenario")) {
            bundle.scenario = meta["scenario"].get<mmcount::ScenarioDescriptor>();
        }
    }
    try {
        auto parsed = mmcount::ingestion::parse_capture_file(path, bundle.setup);
        bundle.frames = std::move(parsed.frames);
        if (parsed.has_setup) bundle.setup = parsed.setup;
        bundle.scenario = parsed.scenario;
        for (const auto& warning : parsed.warnings) std::cerr << "warning: " << warning << "\n";
        if (!parsed.rejected.empty()) {
            std::cerr << "warning: " << parsed.rejected.size() << " rows rejected\n";
        }
    } catch (const mmcount::EmptyCapture&) {
        if (!allow_empty) throw;
    }
    return bundle;
}

int run_synth(const CommonOptions& common, const std::string& spec_path,
              std::optional<std::uint64_t> seed, const std::string& format) {
    auto spec = mmcount::synth::scene_spec_from_json_file(spec_path);
    if (seed) spec.seed = *seed;
    const mmcount::SensorSetup setup;
    const auto scene = mmcount::synth::generate_scene(spec, setup);

    fs::create_directories(common.out_dir);
    const fs::path out(common.out_dir);
    mmcount::ScenarioDescriptor scenario;
    if (format == "csv") {
        std::ofstream capture(out / "capture.csv", std::ios::binary);
        mmcount::ingestion::write_csv(capture, scene.frames);
        json meta;
        meta["setup"] = setup;
        meta["scenario"] = scenario;
        write_json(out / "meta.json", meta);
    } else {
        std::ofstream capture(out / "capture.json", std::ios::binary);
        mmcount::ingestion::write_jsonframes(capture, scene.frames, setup, scenario);
    }
    std::ofstream truth(out / "groundtruth.json", std::ios::binary);
    mmcount::synth::write_ground_truth(truth, scene.truth);
    std::cout << "wrote " << (format == "csv" ? "capture.csv" : "capture.json")
              << " and groundtruth.json to " << common.out_dir << "\n";
    return 0;
}

int run_enhance(const CommonOptions& common, const std::string& in_path,
                const std::string& meta_path, mmcount::pipeline::EnhanceConfig config) {
    auto agent = pick_agent(common);
    auto capture = load_capture(in_path, meta_path);
    const auto result = mmcount::pipeline::enhance(capture.frames, *agent, capture.setup,
                                                   capture.scenario, config);
    fs::create_directories(common.out_dir);
    const fs::path out(common.out_dir);
    {
        std::ofstream enhanced(out / "enhanced.json", std::ios::binary);
        mmcount::ingestion::write_jsonframes(enhanced, result.frames, capture.setup,
                                             capture.scenario);
    }
    write_json(out / "enhance_report.json",
               mmcount::pipeline::enhance_report_json(result, agent->name()));
    if (config.emit_trace) {
        write_json(out / "trace.json", mmcount::pipeline::trace_json(result));
    }
    std::cout << "enhanced " << result.windows.size() << " windows -> " << common.out_dir << "\n";
    return 0;
}

int run_detect(const CommonOptions& common, const std::string& in_path,
               const std::string& meta_path, const mmcount::pipeline::DetectConfig& config,
               bool emit_png) {
    auto agent = pick_agent(common);
    auto capture = load_capture(in_path, meta_path, /*allow_empty=*/true);
    const auto result = mmcount::pipeline::detect(capture.frames, *agent, config);
    fs::create_directories(common.out_dir);
    const fs::path out(common.out_dir);
    write_json(out / "detections.json", mmcount::pipeline::detections_json(result));
    if (emit_png && !capture.frames.empty()) {
        const auto windows = mmcount::ingestion::window_sliding(capture.frames, config.window_ms,
                                                                config.stride_ms);
        for (const auto& window : windows) {
            const auto hm = mmcount::heatmap::build(window, config.extent, config.grid);
            const auto png = mmcount::heatmap::render(hm);
            std::ostringstream stem;
            stem << "heatmap_" << static_cast<long long>(window.start_ms);
            std::ofstream img(out / (stem.str() + ".png"), std::ios::binary);
            img.write(reinterpret_cast<const char*>(png.data()),
                      static_cast<std::streamsize>(png.size()));
            json sidecar;
            sidecar["extent"] = {{"x_min", hm.extent.x_min},
                                 {"x_max", hm.extent.x_max},
                                 {"y_min", hm.extent.y_min},
                                 {"y_max", hm.extent.y_max}};
            sidecar["grid_shape"] = {{"rows", hm.grid.rows}, {"cols", hm.grid.cols}};
            sidecar["cell_area_m2"] = hm.cell_area_m2;
            sidecar["counts"] = hm.counts;
            sidecar["density"] = hm.density;
            sidecar["dropped_weight"] = hm.dropped_weight;
            write_json(out / (stem.str() + ".json"), sidecar);
        }
    }
    std::cout << "detected over " << result.windows.size() << " windows -> " << common.out_dir
              << "\n";
    return 0;
}

int run_eval(const CommonOptions& common, const std::string& detections_path,
             const std::string& truth_path, const mmcount::pipeline::EvalConfig& config) {
    const auto detections = mmcount::pipeline::detections_from_json(load_json(detections_path));
    std::ifstream truth_in(truth_path);
    if (!truth_in) throw mmcount::InputError("cannot open " + truth_path);
    const auto truth = mmcount::synth::read_ground_truth(truth_in);
    const auto report = mmcount::pipeline::evaluate(detections, truth, config);
    fs::create_directories(common.out_dir);
    write_json(fs::path(common.out_dir) / "eval_report.json",
               mmcount::pipeline::eval_report_json(report));
    std::cout << mmcount::pipeline::eval_report_json(report).dump(2) << "\n";
    return 0;
}

int run_pipeline_cmd(const CommonOptions& common, const std::string& spec_path,
                     std::optional<std::uint64_t> seed,
                     mmcount::pipeline::PipelineConfig config) {
    auto agent = pick_agent(common);
    config.scene = mmcount::synth::scene_spec_from_json_file(spec_path);
    if (seed) config.scene.seed = *seed;

    json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = config.scene.seed;
    manifest["agent"] = agent->name();
    manifest["reproducible"] = agent->name() == "heuristic";
    manifest["jobs"] = common.jobs;
    manifest["config"] = {{"window_ms", config.enhance.window_ms},
                          {"stride_ms", config.detect.stride_ms},
                          {"grid", {{"rows", config.detect.grid.rows},
                                    {"cols", config.detect.grid.cols}}},
                          {"mcts", search_config_json(config.enhance.search)},
                          {"swap_order", config.enhance.swap_order},
                          {"no_enhance", config.enhance.no_enhance},
                          {"levels", config.eval.levels},
                          {"sample_every_s", config.eval.sample_every_s}};

    fs::create_directories(common.out_dir);
    const fs::path out(common.out_dir);
    auto& stages = manifest["stages"] = json::array();

    StageClock synth_clock;
    const auto scene = mmcount::synth::generate_scene(config.scene, config.setup);
    {
        std::ofstream capture(out / "capture.json", std::ios::binary);
        mmcount::ingestion::write_jsonframes(capture, scene.frames, config.setup,
                                             config.scenario);
        std::ofstream truth(out / "groundtruth.json", std::ios::binary);
        mmcount::synth::write_ground_truth(truth, scene.truth);
    }
    stages.push_back({{"name", "synth"},
                      {"wall_ms", synth_clock.elapsed_ms()},
                      {"outputs", {"capture.json", "groundtruth.json"}}});

    StageClock enhance_clock;
    const auto enhanced = mmcount::pipeline::enhance(scene.frames, *agent, config.setup,
                                                     config.scenario, config.enhance);
    {
        std::ofstream enhanced_out(out / "enhanced.json", std::ios::binary);
        mmcount::ingestion::write_jsonframes(enhanced_out, enhanced.frames, config.setup,
                                             config.scenario);
    }
    write_json(out / "enhance_report.json",
               mmcount::pipeline::enhance_report_json(enhanced, agent->name()));
    if (config.enhance.emit_trace) {
        write_json(out / "trace.json", mmcount::pipeline::trace_json(enhanced));
    }
    json enhance_outputs = json::array({"enhanced.json", "enhance_report.json"});
    if (config.enhance.emit_trace) enhance_outputs.push_back("trace.json");
    stages.push_back({{"name", "enhance"},
                      {"wall_ms", enhance_clock.elapsed_ms()},
                      {"outputs", enhance_outputs}});

    StageClock detect_clock;
    mmcount::pipeline::DetectConfig detect_config = config.detect;
    detect_config.extent = config.scene.region;
    const auto detections = mmcount::pipeline::detect(enhanced.frames, *agent, detect_config);
    write_json(out / "detections.json", mmcount::pipeline::detections_json(detections));
    stages.push_back({{"name", "detect"},
                      {"wall_ms", detect_clock.elapsed_ms()},
                      {"outputs", {"detections.json"}}});

    StageClock eval_clock;
    const auto report = mmcount::pipeline::evaluate(detections, scene.truth, config.eval);
    write_json(out / "eval_report.json", mmcount::pipeline::eval_report_json(report));
    stages.push_back({{"name", "eval"},
                      {"wall_ms", eval_clock.elapsed_ms()},
                      {"outputs", {"eval_report.json"}}});

    manifest["scene_spec"] = {{"n_persons", config.scene.n_persons},
                              {"duration_s", config.scene.duration_s},
                              {"frame_rate", config.scene.frame_rate},
                              {"noise_rate", config.scene.noise_rate},
                              {"attenuation_exponent", config.scene.attenuation_exponent}};
    write_json(out / "manifest.json", manifest);
    std::cout << mmcount::pipeline::eval_report_json(report).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmWave crowd-counting pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CommonOptions common;
    app.add_option("--out", common.out_dir, "Output directory")->required(false);
    app.add_option("--config", common.config_file, "JSON config file (flags override)");
    app.add_option("--agent", common.agent_kind, "Agent backend: heuristic|remote")
        ->check(CLI::IsMember({"heuristic", "remote"}));
    app.add_option("--agent-url", common.agent_url, "Remote agent base URL");
    app.add_option("--jobs", common.jobs, "Worker threads (default: available cores)");

    std::string spec_path, in_path, meta_path, detections_path, truth_path;
    std::string grid_text, extent_text, weights_text, levels_text, format = "jsonframes";
    std::optional<std::uint64_t> seed;
    bool emit_png = false;

    mmcount::pipeline::EnhanceConfig enhance_config;
    mmcount::pipeline::DetectConfig detect_config;
    mmcount::pipeline::EvalConfig eval_config;

    auto* synth_cmd = app.add_subcommand("synth", "Generate a scene capture plus ground truth");
    synth_cmd->add_option("--spec", spec_path, "Scene spec JSON")->required();
    synth_cmd->add_option("--seed", seed, "Seed override");
    synth_cmd->add_option("--format", format, "capture format: jsonframes|csv")
        ->check(CLI::IsMember({"jsonframes", "csv"}));

    auto add_enhance_flags = [&](CLI::App* cmd) {
        cmd->add_flag("--swap-order", enhance_config.swap_order,
                      "Compensate before noise removal (ablation)");
        cmd->add_flag("--no-enhance", enhance_config.no_enhance, "Passthrough (ablation)");
        cmd->add_flag("--trace", enhance_config.emit_trace, "Emit per-rollout search trace");
        cmd->add_option("--window-ms", enhance_config.window_ms, "Enhancement window");
        cmd->add_option("--budget", enhance_config.search.budget, "MCTS rollout budget");
        cmd->add_option("--max-depth", enhance_config.search.max_depth, "MCTS depth limit");
        cmd->add_option("--exploration-c", enhance_config.search.exploration_c,
                        "UCB exploration constant");
        cmd->add_option("--patience", enhance_config.search.patience, "Early-stop patience");
        cmd->add_option("--epsilon-stop", enhance_config.search.epsilon_stop,
                        "Early-stop improvement threshold");
        cmd->add_option("--weights", weights_text, "Score weights e,a,s");
    };
    auto add_detect_flags = [&](CLI::App* cmd, bool with_window) {
        if (with_window) {
            cmd->add_option("--window-ms", detect_config.window_ms, "Detection window");
        }
        cmd->add_option("--stride-ms", detect_config.stride_ms, "Sliding stride");
        cmd->add_option("--grid", grid_text, "Heatmap grid ROWSxCOLS");
        cmd->add_option("--extent", extent_text, "Heatmap extent x_min,x_max,y_min,y_max");
    };
    auto add_eval_flags = [&](CLI::App* cmd) {
        cmd->add_option("--levels", levels_text, "GAME levels, comma separated");
        cmd->add_option("--sample-every-s", eval_config.sample_every_s,
                        "Protocol sampling period");
    };

    auto* enhance_cmd = app.add_subcommand("enhance", "Noise removal + power compensation");
    enhance_cmd->add_option("--in", in_path, "Capture file (csv or jsonframes)")->required();
    enhance_cmd->add_option("--meta", meta_path, "Setup/scenario sidecar for csv captures");
    add_enhance_flags(enhance_cmd);

    auto* detect_cmd = app.add_subcommand("detect", "Heatmaps, detections, smoothed counts");
    detect_cmd->add_option("--in", in_path, "Capture file (usually enhanced.json)")->required();
    detect_cmd->add_option("--meta", meta_path, "Setup/scenario sidecar for csv captures");
    detect_cmd->add_flag("--png", emit_png, "Write per-window heatmap PNGs");
    add_detect_flags(detect_cmd, true);

    auto* eval_cmd = app.add_subcommand("eval", "GAME + counting accuracy vs ground truth");
    eval_cmd->add_option("--detections", detections_path, "detections.json")->required();
    eval_cmd->add_option("--truth", truth_path, "groundtruth.json")->required();
    add_eval_flags(eval_cmd);

    auto* pipeline_cmd = app.add_subcommand("pipeline", "synth -> enhance -> detect -> eval");
    pipeline_cmd->add_option("--spec", spec_path, "Scene spec JSON")->required();
    pipeline_cmd->add_option("--seed", seed, "Seed override");
    add_enhance_flags(pipeline_cmd);
    add_detect_flags(pipeline_cmd, false);
    add_eval_flags(pipeline_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (common.out_dir.empty()) throw mmcount::InputError("--out is required");
        apply_jobs(common.jobs);
        merge_config_file(common.config_file, enhance_config, detect_config, eval_config);
        if (!grid_text.empty()) detect_config.grid = parse_grid(grid_text);
        if (!extent_text.empty()) detect_config.extent = parse_extent(extent_text);
        if (!weights_text.empty()) enhance_config.search.weights = parse_weights(weights_text);
        if (!levels_text.empty()) {
            eval_config.levels.clear();
            std::istringstream in(levels_text);
            std::string field;
            while (std::getline(in, field, ',')) eval_config.levels.push_back(std::stoi(field));
        }

        if (synth_cmd->parsed()) return run_synth(common, spec_path, seed, format);
        if (enhance_cmd->parsed()) return run_enhance(common, in_path, meta_path, enhance_config);
        if (detect_cmd->parsed()) {
            return run_detect(common, in_path, meta_path, detect_config, emit_png);
        }
        if (eval_cmd->parsed()) return run_eval(common, detections_path, truth_path, eval_config);
        if (pipeline_cmd->parsed()) {
            detect_config.window_ms = enhance_config.window_ms;
            mmcount::pipeline::PipelineConfig config;
            config.enhance = enhance_config;
            config.detect = detect_config;
            config.eval = eval_config;
            return run_pipeline_cmd(common, spec_path, seed, config);
        }
        throw mmcount::InputError("no subcommand given");
    } catch (const mmcount::Error& e) {
        json err{{"error",
                  {{"type", "mmcount"}, {"message", e.what()}, {"exit_code", e.exit_code()}}}};
        std::cout << err.dump() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        json err{{"error", {{"type", "internal"}, {"message", e.what()}, {"exit_code", 4}}}};
        std::cout << err.dump() << "\n";
        return 4;
    }
}
