#include "mmcount/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "mmcount/png.hpp"

namespace mmcount::heatmap {

namespace {

// Ten anchors of a perceptual dark-to-bright ramp, linearly interpolated.
constexpr std::uint8_t kRamp[10][3] = {
    {68, 1, 84},   {72, 40, 120},  {62, 74, 137},  {49, 104, 142}, {38, 130, 142},
    {31, 158, 137}, {53, 183, 121}, {109, 205, 89}, {180, 222, 44}, {253, 231, 37},
};

void ramp_color(double t, Palette palette, std::uint8_t out[3]) {
    t = std::clamp(t, 0.0, 1.0);
    if (palette == Palette::Gray) {
        const auto g = static_cast<std::uint8_t>(std::lround(255.0 * t));
        out[0] = out[1] = out[2] = g;
        return;
    }
    const double pos = t * 9.0;
    const int lo = std::min(static_cast<int>(pos), 8);
    const double frac = pos - lo;
    for (int c = 0; c < 3; ++c) {
        out[c] = static_cast<std::uint8_t>(
            std::lround(kRamp[lo][c] + frac * (kRamp[lo + 1][c] - kRamp[lo][c])));
    }
}

}  // namespace

std::int64_t intensity_weight(double energy) {
    if (energy <= 0.0) return 0;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(energy + 0.5)));
}

std::vector<WeightedPoint> replicate_by_intensity(const CloudWindow& window) {
    std::vector<WeightedPoint> out;
    out.reserve(window.point_count());
    for (const auto& frame : window.frames) {
        for (const auto& p : frame.points) {
            const auto w = intensity_weight(p.energy);
            if (w > 0) out.push_back({p.x, p.y, w});
        }
    }
    return out;
}

BinReport bin_points(const std::vector<WeightedPoint>& points, const Extent2D& extent,
                     const GridShape& shape) {
    if (shape.rows < 1 || shape.cols < 1) throw InputError("bin_points: grid must be >= 1x1");
    if (!(extent.x_max > extent.x_min) || !(extent.y_max > extent.y_min)) {
        throw InputError("bin_points: extent is degenerate");
    }
    std::vector<double> xs(points.size()), ys(points.size());
    std::vector<std::int64_t> ws(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        xs[i] = points[i].x;
        ys[i] = points[i].y;
        ws[i] = points[i].weight;
    }
    auto binned = kernels::bin_weighted(xs, ys, ws, extent, shape);
    return {std::move(binned.counts), binned.dropped};
}

Heatmap to_density(const BinReport& binned, const Extent2D& extent, const GridShape& shape) {
    Heatmap hm;
    hm.extent = extent;
    hm.grid = shape;
    hm.cell_area_m2 = (extent.x_max - extent.x_min) / shape.cols *
                      ((extent.y_max - extent.y_min) / shape.rows);
    hm.counts = binned.counts;
    hm.dropped_weight = binned.dropped;
    hm.density.resize(hm.counts.size());
    for (std::size_t i = 0; i < hm.counts.size(); ++i) {
        hm.density[i] = hm.counts[i] / hm.cell_area_m2;
    }
    return hm;
}

Heatmap build(const CloudWindow& window, const Extent2D& extent, const GridShape& shape) {
    return to_density(bin_points(replicate_by_intensity(window), extent, shape), extent, shape);
}

std::vector<std::uint8_t> render(const Heatmap& hm, const ColorScale& scale) {
    double vmax = scale.max;
    if (!scale.fixed) {
        vmax = 0.0;
        for (double v : hm.density) vmax = std::max(vmax, v);
    }
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(hm.grid.rows) * hm.grid.cols * 3);
    std::size_t i = 0;
    for (int img_row = 0; img_row < hm.grid.rows; ++img_row) {
        const int row = hm.grid.rows - 1 - img_row;  // image top = y_max
        for (int col = 0; col < hm.grid.cols; ++col) {
            const double v = hm.at(row, col);
            const double t = vmax > 0.0 ? v / vmax : 0.0;
            ramp_color(t, scale.palette, &rgb[i]);
            i += 3;
        }
    }
    return png::encode_rgb8(rgb, hm.grid.cols, hm.grid.rows);
}

}  // namespace mmcount::heatmap
