#include "mmcount/detection.hpp"

#include <algorithm>
#include <cmath>

namespace mmcount::detection {

std::vector<Detection> detect_window(const heatmap::Heatmap& hm, agent::Agent& agent) {
    const auto image = heatmap::render(hm);
    std::vector<Detection> detections;
    try {
        detections = agent.detect_crowd(image, hm);
    } catch (const MalformedAgentReply&) {
        detections = agent::HeuristicAgent().detect_crowd(image, hm);
    }
    for (auto& d : detections) {
        d.x = std::clamp(d.x, hm.extent.x_min, hm.extent.x_max);
        d.y = std::clamp(d.y, hm.extent.y_min, hm.extent.y_max);
        d.confidence = std::clamp(d.confidence, 0.0, 1.0);
    }
    return detections;
}

std::vector<int> smooth_counts(const std::vector<int>& window_counts, int lookback) {
    if (lookback < 1) throw InputError("smooth_counts: lookback must be >= 1");
    std::vector<int> smoothed;
    smoothed.reserve(window_counts.size());
    std::vector<int> recent;
    for (std::size_t k = 0; k < window_counts.size(); ++k) {
        const std::size_t lo = k + 1 >= static_cast<std::size_t>(lookback)
                                   ? k + 1 - static_cast<std::size_t>(lookback)
                                   : 0;
        recent.assign(window_counts.begin() + static_cast<std::ptrdiff_t>(lo),
                      window_counts.begin() + static_cast<std::ptrdiff_t>(k + 1));
        std::sort(recent.begin(), recent.end());
        smoothed.push_back(recent[(recent.size() - 1) / 2]);  // lower median when even
    }
    return smoothed;
}

int smoothing_lookback(double duration_ms, double stride_ms) {
    if (stride_ms <= 0.0) throw InvalidStride("smoothing_lookback: stride must be > 0");
    return static_cast<int>(std::ceil(duration_ms / stride_ms));
}

}  // namespace mmcount::detection
