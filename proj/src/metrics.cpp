#include "mmcount/metrics.hpp"

#include <cmath>
#include <cstdlib>

namespace mmcount::metrics {

namespace {

/// Cell index along one axis, or -1 when outside. The max edge belongs to
/// the last cell so clamped detections still count.
int axis_cell(double v, double lo, double hi, int n) {
    if (v < lo || v > hi) return -1;
    if (v == hi) return n - 1;
    const auto idx = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
    return std::min(idx, n - 1);
}

std::vector<long> cell_counts(const std::vector<Position>& positions, const Extent2D& extent,
                              int side) {
    std::vector<long> counts(static_cast<std::size_t>(side) * side, 0);
    for (const auto& p : positions) {
        const int col = axis_cell(p.x, extent.x_min, extent.x_max, side);
        const int row = axis_cell(p.y, extent.y_min, extent.y_max, side);
        if (col < 0 || row < 0) continue;
        counts[static_cast<std::size_t>(row) * side + col] += 1;
    }
    return counts;
}

}  // namespace

double game(const std::vector<Sample>& samples, const Extent2D& extent, int level) {
    if (level < 0) throw InputError("game: level must be >= 0");
    if (samples.empty()) throw InputError("game: no samples");
    if (!(extent.x_max > extent.x_min) || !(extent.y_max > extent.y_min)) {
        throw MismatchedExtent("game: degenerate extent");
    }
    const int side = 1 << level;  // 2^L per axis, 4^L cells
    double total = 0.0;
    for (const auto& sample : samples) {
        const auto pred = cell_counts(sample.predicted, extent, side);
        const auto truth = cell_counts(sample.truth, extent, side);
        long sample_error = 0;
        for (std::size_t c = 0; c < pred.size(); ++c) {
            sample_error += std::labs(pred[c] - truth[c]);
        }
        total += static_cast<double>(sample_error);
    }
    return total / static_cast<double>(samples.size());
}

CountingResult counting_accuracy(const std::vector<int>& predicted_counts,
                                 const std::vector<int>& truth_counts) {
    if (predicted_counts.empty()) throw InputError("counting_accuracy: no samples");
    if (predicted_counts.size() != truth_counts.size()) {
        throw InputError("counting_accuracy: prediction/truth length mismatch");
    }
    std::size_t exact = 0;
    double abs_error = 0.0;
    for (std::size_t i = 0; i < predicted_counts.size(); ++i) {
        if (predicted_counts[i] == truth_counts[i]) ++exact;
        abs_error += std::abs(predicted_counts[i] - truth_counts[i]);
    }
    CountingResult result;
    result.accuracy = static_cast<double>(exact) / static_cast<double>(predicted_counts.size());
    result.mae = abs_error / static_cast<double>(predicted_counts.size());
    return result;
}

}  // namespace mmcount::metrics
