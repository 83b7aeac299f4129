#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmcount/compensation.hpp"
#include "mmcount/heatmap.hpp"
#include "mmcount/types.hpp"

namespace mmcount::agent {

/// Default cap on encoded points for a 200 ms window; scaled linearly for
/// other durations. Overflow keeps the highest-energy points.
inline constexpr std::size_t kPointCapPer200ms = 2048;
inline constexpr int kTokensPerPoint = 5;

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    std::size_t size() const { return end - begin; }
};

/// The four input modalities flattened into one token sequence. The raw-data
/// span has fixed length for a fixed window duration: cap*5 point tokens
/// (PAD-filled on underflow) plus one truncation-status token.
struct TokenSequence {
    std::vector<std::string> tokens;
    Span raw_data, setup, scenario, prompt;

    // Bookkeeping carried alongside (not part of the wire format): which
    // flattened window point each encoded slot came from.
    std::vector<std::size_t> point_map;
    std::size_t window_point_count = 0;
    bool truncated = false;

    std::size_t encoded_points() const { return point_map.size(); }
};

/// Keep/confidence verdicts for the encoded points of a sequence, in slot
/// order. noise_removal expands this to the full window (points dropped by
/// the encoding cap are treated as not kept).
struct NoiseMask {
    std::vector<bool> keep;
    std::vector<double> confidence;
};

/// Deterministic four-modality tokenizer: coordinates quantize at the range
/// resolution, doppler at the doppler resolution, energy into 64 log-spaced
/// bins; setup and scenario become key=value tokens; the prompt is
/// whitespace-tokenized.
TokenSequence serialize_context(const CloudWindow& window, const SensorSetup& setup,
                                const ScenarioDescriptor& scenario,
                                const std::string& task_prompt);

std::size_t point_cap_for(double duration_ms);

/// Energy bin helpers shared by the tokenizer and the heuristic decoder.
int energy_bin(double energy);
double energy_bin_value(int bin);

/// The MLLM boundary: three capabilities behind one interface.
/// Implementations must be safe for concurrent calls.
class Agent {
public:
    virtual ~Agent() = default;

    virtual std::string name() const = 0;

    /// One keep/confidence pair per encoded point.
    virtual NoiseMask classify_noise(const TokenSequence& seq) = 0;

    /// Between 1 and k distinct strategies, all within parameter bounds.
    virtual std::vector<compensation::CompensationStrategy> propose_strategies(
        const compensation::CompensationStateSummary& summary, int k) = 0;

    /// Individual annotations for a rendered heatmap; positions lie inside
    /// the grid's extent.
    virtual std::vector<Detection> detect_crowd(const std::vector<std::uint8_t>& image_png,
                                                const heatmap::Heatmap& grid) = 0;
};

struct HeuristicConfig {
    double epsilon_m = 0.3;       // neighborhood radius for the density rule
    int min_cluster = 4;          // point plus (min_cluster-1) neighbors
    double sparse_percentile = 60.0;
    double dense_percentile = 40.0;
    int detect_min_area_cells = 2;
};

/// Deterministic offline stand-in for the multimodal LLM. Works purely off
/// the serialized token sequence so it exercises the same contract as a
/// remote model: a point is kept when its energy clears the per-scenario
/// percentile threshold or it has enough neighbors within epsilon.
class HeuristicAgent final : public Agent {
public:
    explicit HeuristicAgent(HeuristicConfig config = {});

    std::string name() const override { return "heuristic"; }
    NoiseMask classify_noise(const TokenSequence& seq) override;
    std::vector<compensation::CompensationStrategy> propose_strategies(
        const compensation::CompensationStateSummary& summary, int k) override;
    std::vector<Detection> detect_crowd(const std::vector<std::uint8_t>& image_png,
                                        const heatmap::Heatmap& grid) override;

    const HeuristicConfig& config() const { return config_; }

private:
    HeuristicConfig config_;
};

struct RemoteConfig {
    std::string base_url;
    double timeout_s = 30.0;
    int max_in_flight = 4;
};

/// JSON-over-HTTP client for a remote agent service. Bounds in-flight
/// requests and applies a per-call timeout. Connection failures raise
/// AgentUnavailable; contract violations raise MalformedAgentReply.
class RemoteAgent final : public Agent {
public:
    explicit RemoteAgent(RemoteConfig config);
    ~RemoteAgent() override;

    std::string name() const override { return "remote"; }
    NoiseMask classify_noise(const TokenSequence& seq) override;
    std::vector<compensation::CompensationStrategy> propose_strategies(
        const compensation::CompensationStateSummary& summary, int k) override;
    std::vector<Detection> detect_crowd(const std::vector<std::uint8_t>& image_png,
                                        const heatmap::Heatmap& grid) override;

    /// Number of remote proposals that had to be clamped into bounds.
    std::int64_t clamped_proposals() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Remote when MMCOUNT_AGENT_URL is set (or url is non-empty), heuristic
/// otherwise.
std::shared_ptr<Agent> make_agent(const std::string& url = {});

std::string base64_encode(const std::uint8_t* data, std::size_t len);

}  // namespace mmcount::agent
