#pragma once

#include <vector>

#include "mmcount/agent.hpp"
#include "mmcount/heatmap.hpp"
#include "mmcount/types.hpp"

namespace mmcount::detection {

/// Render the map and hand it to the agent; positions are clamped into the
/// extent. Falls back to the heuristic detector on MalformedAgentReply;
/// other agent errors propagate.
std::vector<Detection> detect_window(const heatmap::Heatmap& hm, agent::Agent& agent);

/// Stabilized count at position k = median of the w most recent raw counts
/// (the available prefix while k < w-1). Even lookbacks use the lower
/// median so outputs stay in the observed value set.
std::vector<int> smooth_counts(const std::vector<int>& window_counts, int lookback);

/// Lookback implied by the sliding-window overlap: ceil(duration/stride).
int smoothing_lookback(double duration_ms, double stride_ms);

}  // namespace mmcount::detection
