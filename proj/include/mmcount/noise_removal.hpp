#pragma once

#include <string>

#include "mmcount/agent.hpp"
#include "mmcount/types.hpp"

namespace mmcount::noise_removal {

struct RemovalReport {
    std::size_t kept = 0;
    std::size_t dropped = 0;
    double mean_confidence = 1.0;
    bool fallback_used = false;     // remote reply was malformed; heuristic stepped in
    std::size_t truncated_dropped = 0;  // points beyond the encoding cap
};

struct RemovalResult {
    CloudWindow window;  // same frame structure, only keep=true points
    RemovalReport report;
};

/// Serialize the window for the agent, classify, and apply the mask. Kept
/// points retain their relative order; kept + dropped always equals the
/// input point count. Points the encoding cap excluded are dropped. On
/// MalformedAgentReply the heuristic classifier is used and the report is
/// flagged; AgentUnavailable propagates.
RemovalResult remove_noise(const CloudWindow& window, agent::Agent& agent,
                           const SensorSetup& setup, const ScenarioDescriptor& scenario);

/// The prompt attached to the noise-removal token sequence.
std::string noise_prompt();

}  // namespace mmcount::noise_removal
