#include "mmcount/agent.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <queue>
#include <sstream>

#include <httplib.h>

#include "mmcount/json_io.hpp"
#include "mmcount/kernels.hpp"

namespace mmcount::agent {

namespace {

constexpr const char* kPadToken = "PAD";
constexpr double kEnergyBinMin = 1e-2;
constexpr double kEnergyBinMax = 1e8;
constexpr int kEnergyBins = 64;  // bin 0 holds [0, min); 1..63 log-spaced

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string quant_token(char axis, double value, double resolution) {
    const auto q = static_cast<long long>(std::llround(value / resolution));
    return std::string(1, axis) + "=" + std::to_string(q);
}

bool parse_kv(const std::string& token, std::string& key, std::string& value) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) return false;
    key = token.substr(0, eq);
    value = token.substr(eq + 1);
    return true;
}

double parse_double_or(const std::string& s, double fallback) {
    double v = fallback;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc()) return fallback;
    return v;
}

/// Nearest-rank percentile of a copy of values.
double percentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(pct / 100.0 * static_cast<double>(values.size())));
    return values[std::min(values.size() - 1, rank > 0 ? rank - 1 : 0)];
}

/// Fixed proposal ladder: exact path-loss exponent first, then under/over
/// brackets widening outward.
constexpr double kSeedAlphas[] = {2.0, 1.5, 2.5, 1.75, 2.25, 1.25, 2.75, 1.0, 3.0};

}  // namespace

std::size_t point_cap_for(double duration_ms) {
    const double scaled = static_cast<double>(kPointCapPer200ms) * duration_ms / 200.0;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scaled)));
}

int energy_bin(double energy) {
    if (energy < kEnergyBinMin) return 0;
    const double ratio = std::log(kEnergyBinMax / kEnergyBinMin);
    const auto bin =
        1 + static_cast<int>(std::floor(std::log(energy / kEnergyBinMin) / ratio * (kEnergyBins - 2)));
    return std::min(bin, kEnergyBins - 1);
}

double energy_bin_value(int bin) {
    if (bin <= 0) return 0.0;
    const double step = std::log(kEnergyBinMax / kEnergyBinMin) / (kEnergyBins - 2);
    return kEnergyBinMin * std::exp((static_cast<double>(bin) - 0.5) * step);
}

TokenSequence serialize_context(const CloudWindow& window, const SensorSetup& setup,
                                const ScenarioDescriptor& scenario,
                                const std::string& task_prompt) {
    TokenSequence seq;
    seq.window_point_count = window.point_count();
    const std::size_t cap = point_cap_for(window.duration_ms);

    // Flatten frame-major, point-minor; on overflow retain the highest-energy
    // points (ties to the earlier index) in their original order.
    std::vector<std::size_t> order(seq.window_point_count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<const RadarPoint*> flat;
    flat.reserve(seq.window_point_count);
    for (const auto& frame : window.frames) {
        for (const auto& p : frame.points) flat.push_back(&p);
    }
    if (seq.window_point_count > cap) {
        seq.truncated = true;
        std::stable_sort(order.begin(), order.end(), [&flat](std::size_t a, std::size_t b) {
            return flat[a]->energy > flat[b]->energy;
        });
        order.resize(cap);
        std::sort(order.begin(), order.end());
    }
    seq.point_map = order;

    seq.raw_data.begin = 0;
    for (std::size_t idx : order) {
        const RadarPoint& p = *flat[idx];
        seq.tokens.push_back(quant_token('x', p.x, setup.range_resolution_m));
        seq.tokens.push_back(quant_token('y', p.y, setup.range_resolution_m));
        seq.tokens.push_back(quant_token('z', p.z, setup.range_resolution_m));
        seq.tokens.push_back(quant_token('d', p.doppler, setup.doppler_resolution_mps));
        seq.tokens.push_back("e=" + std::to_string(energy_bin(p.energy)));
    }
    for (std::size_t i = order.size() * kTokensPerPoint; i < cap * kTokensPerPoint; ++i) {
        seq.tokens.push_back(kPadToken);
    }
    // Fixed-length status slot: the truncation flag on overflow, PAD otherwise.
    seq.tokens.push_back(seq.truncated ? "trunc=1" : kPadToken);
    seq.raw_data.end = seq.tokens.size();

    seq.setup.begin = seq.tokens.size();
    seq.tokens.push_back("frequency_ghz=" + format_double(setup.frequency_ghz));
    seq.tokens.push_back("chirp_slope_mhz_per_us=" + format_double(setup.chirp_slope_mhz_per_us));
    seq.tokens.push_back("chirps_per_frame=" + std::to_string(setup.chirps_per_frame));
    seq.tokens.push_back("range_resolution_m=" + format_double(setup.range_resolution_m));
    seq.tokens.push_back("doppler_resolution_mps=" + format_double(setup.doppler_resolution_mps));
    seq.tokens.push_back("max_range_m=" + format_double(setup.max_range_m));
    seq.tokens.push_back("wavelength_m=" + format_double(setup.wavelength_m));
    seq.setup.end = seq.tokens.size();

    seq.scenario.begin = seq.tokens.size();
    seq.tokens.push_back("environment=" + to_string(scenario.environment));
    seq.tokens.push_back("surface=" + to_string(scenario.surface));
    seq.tokens.push_back("material=" + to_string(scenario.material));
    seq.tokens.push_back("crowd_density=" + to_string(scenario.crowd_density));
    seq.tokens.push_back("motion=" + to_string(scenario.motion));
    seq.tokens.push_back("obstacles=" + to_string(scenario.obstacles));
    seq.scenario.end = seq.tokens.size();

    seq.prompt.begin = seq.tokens.size();
    std::istringstream words(task_prompt);
    std::string word;
    while (words >> word) seq.tokens.push_back(word);
    seq.prompt.end = seq.tokens.size();
    return seq;
}

// ---------------------------------------------------------------------------
// Heuristic agent
// ---------------------------------------------------------------------------

HeuristicAgent::HeuristicAgent(HeuristicConfig config) : config_(config) {}

NoiseMask HeuristicAgent::classify_noise(const TokenSequence& seq) {
    // Decode the sequence the way a remote model would see it: quantized
    // coordinates, binned energies, setup and scenario as key=value tokens.
    double range_res = 0.0, doppler_res = 0.0;
    for (std::size_t i = seq.setup.begin; i < seq.setup.end; ++i) {
        std::string key, value;
        if (!parse_kv(seq.tokens[i], key, value)) continue;
        if (key == "range_resolution_m") range_res = parse_double_or(value, 0.0);
        if (key == "doppler_resolution_mps") doppler_res = parse_double_or(value, 0.0);
    }
    if (range_res <= 0.0 || doppler_res <= 0.0) {
        throw MalformedAgentReply("heuristic: token sequence lacks resolution tokens");
    }
    CrowdDensity density = CrowdDensity::Sparse;
    for (std::size_t i = seq.scenario.begin; i < seq.scenario.end; ++i) {
        std::string key, value;
        if (parse_kv(seq.tokens[i], key, value) && key == "crowd_density") {
            density = crowd_density_from_string(value);
        }
    }

    std::vector<kernels::Vec3> pts;
    std::vector<double> energies;
    for (std::size_t i = seq.raw_data.begin; i + kTokensPerPoint <= seq.raw_data.end;
         i += kTokensPerPoint) {
        if (seq.tokens[i] == kPadToken || seq.tokens[i].rfind("trunc=", 0) == 0) break;
        std::string key, value;
        kernels::Vec3 p;
        parse_kv(seq.tokens[i], key, value);
        p.x = parse_double_or(value, 0.0) * range_res;
        parse_kv(seq.tokens[i + 1], key, value);
        p.y = parse_double_or(value, 0.0) * range_res;
        parse_kv(seq.tokens[i + 2], key, value);
        p.z = parse_double_or(value, 0.0) * range_res;
        parse_kv(seq.tokens[i + 4], key, value);
        energies.push_back(energy_bin_value(static_cast<int>(parse_double_or(value, 0.0))));
        pts.push_back(p);
    }

    const double tau = percentile(
        energies, density == CrowdDensity::Sparse ? config_.sparse_percentile
                                                  : config_.dense_percentile);
    const auto neighbors = kernels::neighbor_counts(pts, config_.epsilon_m);
    const int needed = config_.min_cluster - 1;

    NoiseMask mask;
    mask.keep.resize(pts.size());
    mask.confidence.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const bool by_energy = energies[i] >= tau;
        const bool by_density = neighbors[i] >= needed;
        mask.keep[i] = by_energy || by_density;
        if (mask.keep[i]) {
            mask.confidence[i] = by_energy && by_density ? 0.95 : 0.75;
        } else {
            const double margin =
                needed > 0 ? 1.0 - static_cast<double>(neighbors[i]) / needed : 1.0;
            mask.confidence[i] = 0.6 + 0.3 * std::clamp(margin, 0.0, 1.0);
        }
    }
    return mask;
}

std::vector<compensation::CompensationStrategy> HeuristicAgent::propose_strategies(
    const compensation::CompensationStateSummary& summary, int k) {
    (void)summary;
    if (k < 1) throw InputError("propose_strategies: k must be >= 1");
    std::vector<compensation::CompensationStrategy> out;
    const int n = std::min<int>(k, static_cast<int>(std::size(kSeedAlphas)));
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        compensation::CompensationStrategy s;
        s.alpha = kSeedAlphas[i];
        s.clip_db = compensation::kClipDbMax;
        out.push_back(s);
    }
    return out;
}

std::vector<Detection> HeuristicAgent::detect_crowd(const std::vector<std::uint8_t>& image_png,
                                                    const heatmap::Heatmap& grid) {
    (void)image_png;  // the heuristic reads the grid the image was rendered from
    const auto& density = grid.density;
    double mean = 0.0;
    std::size_t nonzero = 0;
    for (double v : density) {
        if (v > 0.0) {
            mean += v;
            ++nonzero;
        }
    }
    if (nonzero == 0) return {};
    mean /= static_cast<double>(nonzero);
    double var = 0.0;
    for (double v : density) {
        if (v > 0.0) var += (v - mean) * (v - mean);
    }
    const double threshold = mean + std::sqrt(var / static_cast<double>(nonzero));

    const int rows = grid.grid.rows;
    const int cols = grid.grid.cols;
    const double dx = (grid.extent.x_max - grid.extent.x_min) / cols;
    const double dy = (grid.extent.y_max - grid.extent.y_min) / rows;

    // 8-connected components over cells at or above the threshold.
    std::vector<int> label(density.size(), -1);
    struct Component {
        double mass = 0.0, cx = 0.0, cy = 0.0;
        int cells = 0;
    };
    std::vector<Component> components;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < density.size(); ++s) {
        if (label[s] != -1 || density[s] <= 0.0 || density[s] < threshold) continue;
        const int id = static_cast<int>(components.size());
        components.emplace_back();
        label[s] = id;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t cell = stack.back();
            stack.pop_back();
            const int r = static_cast<int>(cell) / cols;
            const int c = static_cast<int>(cell) % cols;
            auto& comp = components[static_cast<std::size_t>(id)];
            comp.mass += density[cell];
            comp.cx += density[cell] * (grid.extent.x_min + (c + 0.5) * dx);
            comp.cy += density[cell] * (grid.extent.y_min + (r + 0.5) * dy);
            comp.cells += 1;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int nr = r + dr, nc = c + dc;
                    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                    const auto ncell = static_cast<std::size_t>(nr) * cols + nc;
                    if (label[ncell] != -1 || density[ncell] <= 0.0 ||
                        density[ncell] < threshold) {
                        continue;
                    }
                    label[ncell] = id;
                    stack.push_back(ncell);
                }
            }
        }
    }

    double max_mass = 0.0;
    for (const auto& comp : components) {
        if (comp.cells >= config_.detect_min_area_cells) max_mass = std::max(max_mass, comp.mass);
    }
    std::vector<Detection> detections;
    for (const auto& comp : components) {
        if (comp.cells < config_.detect_min_area_cells) continue;
        Detection d;
        d.x = comp.cx / comp.mass;
        d.y = comp.cy / comp.mass;
        d.confidence = max_mass > 0.0 ? comp.mass / max_mass : 1.0;
        detections.push_back(std::move(d));
    }
    return detections;
}

// ---------------------------------------------------------------------------
// Remote agent
// ---------------------------------------------------------------------------

namespace {

json spans_to_json(const TokenSequence& seq) {
    auto span = [](const Span& s) { return json::array({s.begin, s.end}); };
    return json{{"raw", span(seq.raw_data)},
                {"setup", span(seq.setup)},
                {"scenario", span(seq.scenario)},
                {"prompt", span(seq.prompt)}};
}

json grid_to_json(const heatmap::Heatmap& hm) {
    return json{{"extent",
                 {{"x_min", hm.extent.x_min},
                  {"x_max", hm.extent.x_max},
                  {"y_min", hm.extent.y_min},
                  {"y_max", hm.extent.y_max}}},
                {"rows", hm.grid.rows},
                {"cols", hm.grid.cols},
                {"cell_area_m2", hm.cell_area_m2},
                {"counts", hm.counts},
                {"density", hm.density}};
}

/// Bounds the number of concurrent remote calls.
class InFlightLimiter {
public:
    explicit InFlightLimiter(int limit) : available_(limit) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

struct InFlightGuard {
    explicit InFlightGuard(InFlightLimiter& l) : limiter(l) { limiter.acquire(); }
    ~InFlightGuard() { limiter.release(); }
    InFlightLimiter& limiter;
};

}  // namespace

struct RemoteAgent::Impl {
    RemoteConfig config;
    InFlightLimiter limiter;
    std::atomic<std::int64_t> clamped{0};

    explicit Impl(RemoteConfig cfg) : config(std::move(cfg)), limiter(config.max_in_flight) {}

    json post(const std::string& path, const json& body) {
        InFlightGuard guard(limiter);
        httplib::Client client(config.base_url);
        const auto timeout = std::chrono::duration<double>(config.timeout_s);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            throw AgentUnavailable("remote agent unreachable at " + config.base_url + path +
                                   " (" + httplib::to_string(res.error()) + ")");
        }
        if (res->status != 200) {
            throw AgentUnavailable("remote agent returned HTTP " + std::to_string(res->status) +
                                   " for " + path);
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw MalformedAgentReply(std::string("remote agent reply is not JSON: ") + e.what());
        }
    }
};

RemoteAgent::RemoteAgent(RemoteConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteAgent::~RemoteAgent() = default;

std::int64_t RemoteAgent::clamped_proposals() const { return impl_->clamped.load(); }

NoiseMask RemoteAgent::classify_noise(const TokenSequence& seq) {
    json body{{"tokens", seq.tokens}, {"spans", spans_to_json(seq)}};
    const json reply = impl_->post("/v1/noise", body);
    NoiseMask mask;
    try {
        mask.keep = reply.at("keep").get<std::vector<bool>>();
        mask.confidence = reply.at("confidence").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw MalformedAgentReply(std::string("noise reply shape: ") + e.what());
    }
    if (mask.keep.size() != seq.encoded_points() ||
        mask.confidence.size() != seq.encoded_points()) {
        throw MalformedAgentReply("noise reply length " + std::to_string(mask.keep.size()) +
                                  " does not match encoded point count " +
                                  std::to_string(seq.encoded_points()));
    }
    for (auto& c : mask.confidence) c = std::clamp(c, 0.0, 1.0);
    return mask;
}

std::vector<compensation::CompensationStrategy> RemoteAgent::propose_strategies(
    const compensation::CompensationStateSummary& summary, int k) {
    if (k < 1) throw InputError("propose_strategies: k must be >= 1");
    json body{{"summary",
               {{"profile", summary.profile},
                {"first_bin", summary.first_bin},
                {"bin_width_m", summary.bin_width_m},
                {"cv", summary.cv},
                {"scenario", summary.scenario},
                {"setup_digest", summary.setup_digest}}},
              {"k", k}};
    const json reply = impl_->post("/v1/strategies", body);
    std::vector<compensation::CompensationStrategy> out;
    try {
        for (const auto& js : reply.at("strategies")) {
            compensation::CompensationStrategy s;
            s.alpha = js.at("alpha").get<double>();
            const auto gains = js.at("sector_gains").get<std::vector<double>>();
            if (gains.size() != s.sector_gains.size()) {
                throw MalformedAgentReply("strategy must carry 8 sector gains");
            }
            std::copy(gains.begin(), gains.end(), s.sector_gains.begin());
            s.clip_db = js.at("clip_db").get<double>();
            if (!s.within_bounds()) {
                impl_->clamped.fetch_add(1);
                s = s.clamped();
            }
            out.push_back(s);
        }
    } catch (const json::exception& e) {
        throw MalformedAgentReply(std::string("strategies reply shape: ") + e.what());
    }
    if (out.empty() || out.size() > static_cast<std::size_t>(k)) {
        throw MalformedAgentReply("strategies reply must carry between 1 and k entries");
    }
    return out;
}

std::vector<Detection> RemoteAgent::detect_crowd(const std::vector<std::uint8_t>& image_png,
                                                 const heatmap::Heatmap& grid) {
    json body{{"image_b64", base64_encode(image_png.data(), image_png.size())},
              {"grid", grid_to_json(grid)}};
    const json reply = impl_->post("/v1/detect", body);
    std::vector<Detection> out;
    try {
        for (const auto& jd : reply.at("detections")) {
            out.push_back(jd.get<Detection>());
        }
    } catch (const json::exception& e) {
        throw MalformedAgentReply(std::string("detect reply shape: ") + e.what());
    }
    for (auto& d : out) {
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
            throw MalformedAgentReply("detection confidence outside [0,1]");
        }
    }
    return out;
}

std::shared_ptr<Agent> make_agent(const std::string& url) {
    std::string target = url;
    if (target.empty()) {
        if (const char* env = std::getenv("MMCOUNT_AGENT_URL")) target = env;
    }
    if (target.empty()) return std::make_shared<HeuristicAgent>();
    RemoteConfig cfg;
    cfg.base_url = target;
    return std::make_shared<RemoteAgent>(std::move(cfg));
}

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const std::uint32_t b0 = data[i];
        const std::uint32_t b1 = i + 1 < len ? data[i + 1] : 0;
        const std::uint32_t b2 = i + 2 < len ? data[i + 2] : 0;
        const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
        out.push_back(alphabet[(triple >> 18) & 0x3f]);
        out.push_back(alphabet[(triple >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? alphabet[(triple >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? alphabet[triple & 0x3f] : '=');
    }
    return out;
}

}  // namespace mmcount::agent
