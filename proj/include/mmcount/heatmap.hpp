#pragma once

#include <cstdint>
#include <vector>

#include "mmcount/kernels.hpp"
#include "mmcount/types.hpp"

namespace mmcount::heatmap {

using kernels::Extent2D;
using kernels::GridShape;

/// Gridded 2-D density field over the x-y plane. counts is row-major with
/// row 0 at y_min; density = counts / cell_area.
struct Heatmap {
    Extent2D extent;
    GridShape grid;
    double cell_area_m2 = 0.0;
    std::vector<double> counts;
    std::vector<double> density;
    std::int64_t dropped_weight = 0;  // replicated mass outside the extent

    double at(int row, int col) const {
        return density[static_cast<std::size_t>(row) * grid.cols + col];
    }
};

struct WeightedPoint {
    double x = 0.0;
    double y = 0.0;
    std::int64_t weight = 0;
};

/// Round-half-up replication weight: round(energy), with a minimum of 1 for
/// energies in (0, 0.5]; zero energy contributes nothing.
std::int64_t intensity_weight(double energy);

/// Project a window's points onto the x-y plane with replication weights.
std::vector<WeightedPoint> replicate_by_intensity(const CloudWindow& window);

struct BinReport {
    std::vector<double> counts;
    std::int64_t dropped = 0;
};

/// Half-open cells [edge, next_edge); out-of-extent mass is dropped and
/// reported, never silently lost.
BinReport bin_points(const std::vector<WeightedPoint>& points, const Extent2D& extent,
                     const GridShape& shape);

Heatmap to_density(const BinReport& binned, const Extent2D& extent, const GridShape& shape);

/// replicate -> bin -> density in one call.
Heatmap build(const CloudWindow& window, const Extent2D& extent, const GridShape& shape);

enum class Palette { Viridis, Gray };

struct ColorScale {
    bool fixed = false;   // false: auto-scale to the map's max density
    double max = 0.0;     // used when fixed
    Palette palette = Palette::Viridis;
};

/// Deterministic PNG rendering, one pixel per cell; image row 0 is the cell
/// row at y_max.
std::vector<std::uint8_t> render(const Heatmap& hm, const ColorScale& scale = {});

}  // namespace mmcount::heatmap
