#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mmcount::kernels {

/// Packed point position used by the data-parallel kernels.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct GridShape {
    int rows = 0, cols = 0;
};

struct Extent2D {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

struct BinResult {
    std::vector<double> counts;  // row-major rows*cols
    std::int64_t dropped = 0;    // total weight that fell outside the extent
};

// ---------------------------------------------------------------------------
// OpenMP kernels. Each has a serial twin in kernels::reference used as the
// test oracle and by the benchmark target. Parallel results are bit-identical
// to serial for the integer-mass kernels; range_profile merges per-thread
// partials in thread order, so it is deterministic for a fixed thread count.
// ---------------------------------------------------------------------------

/// For each point, the number of *other* points within eps (Euclidean).
std::vector<int> neighbor_counts(std::span<const Vec3> pts, double eps);

/// energies[i] *= min(clip_linear, range_i^alpha) * sector_gain(azimuth_i).
/// Ranges and azimuth sectors are derived from pts; r_ref is 1 m. Sector k
/// covers azimuth [-90 + 22.5k, -90 + 22.5(k+1)) degrees around +y; points
/// outside the front half-plane clamp to the nearest edge sector.
void apply_gains(std::span<const Vec3> pts, std::span<double> energies, double alpha,
                 const std::array<double, 8>& sector_gains, double clip_linear);

/// Weighted 2-D histogram over half-open cells [edge, next_edge). Integer
/// weights keep the sums exact and order-independent.
BinResult bin_weighted(std::span<const double> xs, std::span<const double> ys,
                       std::span<const std::int64_t> weights, const Extent2D& extent,
                       const GridShape& shape);

/// Mean energy per range bin over [first_bin*w, (last_bin+1)*w). The caller
/// picks the bin span; bins without points yield 0.
std::vector<double> range_profile(std::span<const Vec3> pts, std::span<const double> energies,
                                  double bin_width, std::size_t first_bin, std::size_t n_bins);

/// Sector index for a point, shared by serial and parallel paths.
int azimuth_sector(double x, double y);

namespace reference {

std::vector<int> neighbor_counts(std::span<const Vec3> pts, double eps);
void apply_gains(std::span<const Vec3> pts, std::span<double> energies, double alpha,
                 const std::array<double, 8>& sector_gains, double clip_linear);
BinResult bin_weighted(std::span<const double> xs, std::span<const double> ys,
                       std::span<const std::int64_t> weights, const Extent2D& extent,
                       const GridShape& shape);
std::vector<double> range_profile(std::span<const Vec3> pts, std::span<const double> energies,
                                  double bin_width, std::size_t first_bin, std::size_t n_bins);

}  // namespace reference

}  // namespace mmcount::kernels
