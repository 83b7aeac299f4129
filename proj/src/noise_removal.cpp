#include "mmcount/noise_removal.hpp"

namespace mmcount::noise_removal {

std::string noise_prompt() {
    return "keep reflections from people and drop isolated low-energy clutter";
}

RemovalResult remove_noise(const CloudWindow& window, agent::Agent& agent,
                           const SensorSetup& setup, const ScenarioDescriptor& scenario) {
    const auto seq = agent::serialize_context(window, setup, scenario, noise_prompt());

    agent::NoiseMask mask;
    bool fallback = false;
    try {
        mask = agent.classify_noise(seq);
        if (mask.keep.size() != seq.encoded_points() ||
            mask.confidence.size() != seq.encoded_points()) {
            throw MalformedAgentReply("noise mask length does not match encoded points");
        }
    } catch (const MalformedAgentReply&) {
        mask = agent::HeuristicAgent().classify_noise(seq);
        fallback = true;
    }

    // Expand the encoded-point mask to the whole window; points the cap
    // excluded were the lowest-energy overflow and are dropped.
    std::vector<bool> keep(seq.window_point_count, false);
    std::vector<double> confidence(seq.window_point_count, 1.0);
    for (std::size_t slot = 0; slot < seq.point_map.size(); ++slot) {
        keep[seq.point_map[slot]] = mask.keep[slot];
        confidence[seq.point_map[slot]] = mask.confidence[slot];
    }

    RemovalResult result;
    result.report.fallback_used = fallback;
    result.report.truncated_dropped = seq.window_point_count - seq.encoded_points();
    result.window.start_ms = window.start_ms;
    result.window.duration_ms = window.duration_ms;
    result.window.frames.reserve(window.frames.size());

    double confidence_sum = 0.0;
    std::size_t flat = 0;
    for (const auto& frame : window.frames) {
        Frame cleaned;
        cleaned.index = frame.index;
        cleaned.timestamp_ms = frame.timestamp_ms;
        for (const auto& p : frame.points) {
            confidence_sum += confidence[flat];
            if (keep[flat]) {
                cleaned.points.push_back(p);
                ++result.report.kept;
            } else {
                ++result.report.dropped;
            }
            ++flat;
        }
        result.window.frames.push_back(std::move(cleaned));
    }
    result.report.mean_confidence =
        flat > 0 ? confidence_sum / static_cast<double>(flat) : 1.0;
    return result;
}

}  // namespace mmcount::noise_removal
