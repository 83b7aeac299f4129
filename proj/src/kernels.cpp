#include "mmcount/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mmcount::kernels {

namespace {

constexpr double kDegPerSector = 22.5;

inline double sq(double v) { return v * v; }

inline double point_range(const Vec3& p) { return std::sqrt(sq(p.x) + sq(p.y) + sq(p.z)); }

inline double distance_gain(double r, double alpha, double clip_linear) {
    return std::min(clip_linear, std::pow(r, alpha));
}

inline std::ptrdiff_t cell_of(double v, double lo, double hi, int n) {
    if (v < lo || v >= hi) return -1;
    auto idx = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * n));
    return std::min<std::ptrdiff_t>(idx, n - 1);
}

}  // namespace

int azimuth_sector(double x, double y) {
    // atan2(x, y): 0 deg straight ahead (+y), +90 deg to +x.
    const double az_deg = std::atan2(x, y) * 57.29577951308232;
    const int k = static_cast<int>(std::floor((az_deg + 90.0) / kDegPerSector));
    return std::clamp(k, 0, 7);
}

std::vector<int> neighbor_counts(std::span<const Vec3> pts, double eps) {
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
    std::vector<int> counts(pts.size(), 0);
    const double eps2 = eps * eps;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        int c = 0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d2 =
                sq(pts[i].x - pts[j].x) + sq(pts[i].y - pts[j].y) + sq(pts[i].z - pts[j].z);
            if (d2 <= eps2) ++c;
        }
        counts[i] = c;
    }
    return counts;
}

void apply_gains(std::span<const Vec3> pts, std::span<double> energies, double alpha,
                 const std::array<double, 8>& sector_gains, double clip_linear) {
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double gain = distance_gain(point_range(pts[i]), alpha, clip_linear) *
                            sector_gains[static_cast<std::size_t>(azimuth_sector(pts[i].x, pts[i].y))];
        energies[i] *= gain;
    }
}

BinResult bin_weighted(std::span<const double> xs, std::span<const double> ys,
                       std::span<const std::int64_t> weights, const Extent2D& extent,
                       const GridShape& shape) {
    const auto n = static_cast<std::ptrdiff_t>(xs.size());
    const std::size_t cells = static_cast<std::size_t>(shape.rows) * shape.cols;
    BinResult out;
    out.counts.assign(cells, 0.0);
    std::int64_t dropped = 0;
#ifdef _OPENMP
#pragma omp parallel reduction(+ : dropped)
    {
        std::vector<double> local(cells, 0.0);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto col = cell_of(xs[i], extent.x_min, extent.x_max, shape.cols);
            const auto row = cell_of(ys[i], extent.y_min, extent.y_max, shape.rows);
            if (col < 0 || row < 0) {
                dropped += weights[i];
            } else {
                local[static_cast<std::size_t>(row) * shape.cols + col] +=
                    static_cast<double>(weights[i]);
            }
        }
#pragma omp critical
        for (std::size_t c = 0; c < cells; ++c) out.counts[c] += local[c];
    }
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto col = cell_of(xs[i], extent.x_min, extent.x_max, shape.cols);
        const auto row = cell_of(ys[i], extent.y_min, extent.y_max, shape.rows);
        if (col < 0 || row < 0) {
            dropped += weights[i];
        } else {
            out.counts[static_cast<std::size_t>(row) * shape.cols + col] +=
                static_cast<double>(weights[i]);
        }
    }
#endif
    out.dropped = dropped;
    return out;
}

std::vector<double> range_profile(std::span<const Vec3> pts, std::span<const double> energies,
                                  double bin_width, std::size_t first_bin, std::size_t n_bins) {
    const auto n = static_cast<std::ptrdiff_t>(pts.size());
    std::vector<double> sums(n_bins, 0.0);
    std::vector<std::int64_t> hits(n_bins, 0);
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    std::vector<std::vector<double>> part_sums(max_threads, std::vector<double>(n_bins, 0.0));
    std::vector<std::vector<std::int64_t>> part_hits(max_threads,
                                                     std::vector<std::int64_t>(n_bins, 0));
#pragma omp parallel
    {
        const int tid = omp_get_thread_num();
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto bin = static_cast<std::int64_t>(std::floor(point_range(pts[i]) / bin_width)) -
                             static_cast<std::int64_t>(first_bin);
            if (bin < 0 || bin >= static_cast<std::int64_t>(n_bins)) continue;
            part_sums[tid][static_cast<std::size_t>(bin)] += energies[i];
            part_hits[tid][static_cast<std::size_t>(bin)] += 1;
        }
    }
    // Merge in thread order so the summation order is fixed per thread count.
    for (int t = 0; t < max_threads; ++t) {
        for (std::size_t b = 0; b < n_bins; ++b) {
            sums[b] += part_sums[t][b];
            hits[b] += part_hits[t][b];
        }
    }
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto bin = static_cast<std::int64_t>(std::floor(point_range(pts[i]) / bin_width)) -
                         static_cast<std::int64_t>(first_bin);
        if (bin < 0 || bin >= static_cast<std::int64_t>(n_bins)) continue;
        sums[static_cast<std::size_t>(bin)] += energies[i];
        hits[static_cast<std::size_t>(bin)] += 1;
    }
#endif
    std::vector<double> means(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (hits[b] > 0) means[b] = sums[b] / static_cast<double>(hits[b]);
    }
    return means;
}

namespace reference {

std::vector<int> neighbor_counts(std::span<const Vec3> pts, double eps) {
    const auto n = pts.size();
    std::vector<int> counts(n, 0);
    const double eps2 = eps * eps;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d2 =
                sq(pts[i].x - pts[j].x) + sq(pts[i].y - pts[j].y) + sq(pts[i].z - pts[j].z);
            if (d2 <= eps2) ++counts[i];
        }
    }
    return counts;
}

void apply_gains(std::span<const Vec3> pts, std::span<double> energies, double alpha,
                 const std::array<double, 8>& sector_gains, double clip_linear) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double gain = distance_gain(point_range(pts[i]), alpha, clip_linear) *
                            sector_gains[static_cast<std::size_t>(azimuth_sector(pts[i].x, pts[i].y))];
        energies[i] *= gain;
    }
}

BinResult bin_weighted(std::span<const double> xs, std::span<const double> ys,
                       std::span<const std::int64_t> weights, const Extent2D& extent,
                       const GridShape& shape) {
    BinResult out;
    out.counts.assign(static_cast<std::size_t>(shape.rows) * shape.cols, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto col = cell_of(xs[i], extent.x_min, extent.x_max, shape.cols);
        const auto row = cell_of(ys[i], extent.y_min, extent.y_max, shape.rows);
        if (col < 0 || row < 0) {
            out.dropped += weights[i];
        } else {
            out.counts[static_cast<std::size_t>(row) * shape.cols + col] +=
                static_cast<double>(weights[i]);
        }
    }
    return out;
}

std::vector<double> range_profile(std::span<const Vec3> pts, std::span<const double> energies,
                                  double bin_width, std::size_t first_bin, std::size_t n_bins) {
    std::vector<double> sums(n_bins, 0.0);
    std::vector<std::int64_t> hits(n_bins, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto bin = static_cast<std::int64_t>(std::floor(point_range(pts[i]) / bin_width)) -
                         static_cast<std::int64_t>(first_bin);
        if (bin < 0 || bin >= static_cast<std::int64_t>(n_bins)) continue;
        sums[static_cast<std::size_t>(bin)] += energies[i];
        hits[static_cast<std::size_t>(bin)] += 1;
    }
    std::vector<double> means(n_bins, 0.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (hits[b] > 0) means[b] = sums[b] / static_cast<double>(hits[b]);
    }
    return means;
}

}  // namespace reference

}  // namespace mmcount::kernels
