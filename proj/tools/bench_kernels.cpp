// Benchmark: OpenMP kernels against their serial reference twins.
// Run with --quick for a sub-second smoke pass.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mmcount/kernels.hpp"
#include "mmcount/rng.hpp"

namespace {

using mmcount::kernels::Extent2D;
using mmcount::kernels::GridShape;
using mmcount::kernels::Vec3;

struct Inputs {
    std::vector<Vec3> pts;
    std::vector<double> energies;
    std::vector<double> xs, ys;
    std::vector<std::int64_t> weights;
};

Inputs make_inputs(std::size_t n) {
    mmcount::rng::Engine rng(42);
    Inputs in;
    in.pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.pts.push_back({rng.uniform(-3, 3), rng.uniform(0.3, 6), rng.uniform(0, 1.5)});
        in.energies.push_back(rng.uniform(0.1, 50));
        in.xs.push_back(in.pts.back().x);
        in.ys.push_back(in.pts.back().y);
        in.weights.push_back(rng.uniform_int(1, 40));
    }
    return in;
}

template <typename F>
double time_ms(int reps, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void report(const char* name, std::size_t n, double serial_ms, double parallel_ms) {
    std::printf("%-16s n=%-8zu serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n", name, n,
                serial_ms, parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const std::vector<std::size_t> neighbor_sizes =
        quick ? std::vector<std::size_t>{512} : std::vector<std::size_t>{2048, 8192};
    const std::vector<std::size_t> point_sizes =
        quick ? std::vector<std::size_t>{4096} : std::vector<std::size_t>{200000, 1000000};
    const int reps = quick ? 2 : 5;

    namespace k = mmcount::kernels;
    for (std::size_t n : neighbor_sizes) {
        const auto in = make_inputs(n);
        const double serial =
            time_ms(reps, [&] { (void)k::reference::neighbor_counts(in.pts, 0.3); });
        const double parallel = time_ms(reps, [&] { (void)k::neighbor_counts(in.pts, 0.3); });
        report("neighbor_counts", n, serial, parallel);
    }

    const std::array<double, 8> gains = {1, 1.1, 0.9, 1, 1, 1.2, 0.8, 1};
    for (std::size_t n : point_sizes) {
        const auto in = make_inputs(n);
        auto e1 = in.energies;
        auto e2 = in.energies;
        const double serial =
            time_ms(reps, [&] { k::reference::apply_gains(in.pts, e1, 2.0, gains, 1e4); });
        const double parallel =
            time_ms(reps, [&] { k::apply_gains(in.pts, e2, 2.0, gains, 1e4); });
        report("apply_gains", n, serial, parallel);
    }

    const Extent2D extent{-3, 3, 0, 6};
    const GridShape grid{64, 64};
    for (std::size_t n : point_sizes) {
        const auto in = make_inputs(n);
        const double serial = time_ms(
            reps, [&] { (void)k::reference::bin_weighted(in.xs, in.ys, in.weights, extent, grid); });
        const double parallel =
            time_ms(reps, [&] { (void)k::bin_weighted(in.xs, in.ys, in.weights, extent, grid); });
        report("bin_weighted", n, serial, parallel);
    }

    for (std::size_t n : point_sizes) {
        const auto in = make_inputs(n);
        const double serial = time_ms(
            reps, [&] { (void)k::reference::range_profile(in.pts, in.energies, 0.176, 0, 64); });
        const double parallel =
            time_ms(reps, [&] { (void)k::range_profile(in.pts, in.energies, 0.176, 0, 64); });
        report("range_profile", n, serial, parallel);
    }
    return 0;
}
