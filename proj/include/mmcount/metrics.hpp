#pragma once

#include <vector>

#include "mmcount/kernels.hpp"
#include "mmcount/types.hpp"

namespace mmcount::metrics {

using kernels::Extent2D;

struct Position {
    double x = 0.0;
    double y = 0.0;
};

/// One evaluation sample: predicted and ground-truth individuals over the
/// same extent.
struct Sample {
    std::vector<Position> predicted;
    std::vector<Position> truth;
};

/// Grid Average Mean Error at level L: partition the extent into 2^L x 2^L
/// cells, count individuals per cell (unit mass, half-open cells, the max
/// edge folding into the last cell), sum absolute count differences per
/// sample, and average over samples. Positions outside the extent are
/// ignored on both sides.
double game(const std::vector<Sample>& samples, const Extent2D& extent, int level);

struct CountingResult {
    double accuracy = 0.0;  // fraction of samples with exact count match
    double mae = 0.0;       // mean absolute count error
};

/// Exact-match rate plus companion MAE. Throws InputError on empty input or
/// mismatched lengths.
CountingResult counting_accuracy(const std::vector<int>& predicted_counts,
                                 const std::vector<int>& truth_counts);

}  // namespace mmcount::metrics
