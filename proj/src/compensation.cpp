#include "mmcount/compensation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "mmcount/kernels.hpp"

namespace mmcount::compensation {

namespace {

constexpr double kPi = 3.141592653589793;

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct FlatWindow {
    std::vector<kernels::Vec3> pts;
    std::vector<double> energies;
};

FlatWindow flatten(const CloudWindow& window) {
    FlatWindow flat;
    flat.pts.reserve(window.point_count());
    flat.energies.reserve(flat.pts.capacity());
    for (const auto& frame : window.frames) {
        for (const auto& p : frame.points) {
            flat.pts.push_back({p.x, p.y, p.z});
            flat.energies.push_back(p.energy);
        }
    }
    return flat;
}

/// Mean/population-stddev over a profile; empty -> {0, 0}.
std::pair<double, double> profile_moments(const std::vector<double>& profile) {
    if (profile.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : profile) mean += v;
    mean /= static_cast<double>(profile.size());
    double var = 0.0;
    for (double v : profile) var += (v - mean) * (v - mean);
    var /= static_cast<double>(profile.size());
    return {mean, std::sqrt(var)};
}

CompensationStateSummary summarize_points(const FlatWindow& flat, const SensorSetup& setup,
                                          const ScenarioDescriptor& scenario) {
    CompensationStateSummary summary;
    summary.scenario = scenario;
    summary.bin_width_m = profile_bin_width(setup);
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%08x",
                  static_cast<unsigned>(setup.frequency_ghz * 1000) ^
                      static_cast<unsigned>(setup.range_resolution_m * 1e6) * 2654435761u);
    summary.setup_digest = digest;
    if (flat.pts.empty()) return summary;

    double r_min = std::numeric_limits<double>::infinity();
    double r_max = 0.0;
    for (const auto& p : flat.pts) {
        const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    const auto first = static_cast<std::size_t>(std::floor(r_min / summary.bin_width_m));
    const auto last = static_cast<std::size_t>(std::floor(r_max / summary.bin_width_m));
    summary.first_bin = first;
    summary.profile = kernels::range_profile(flat.pts, flat.energies, summary.bin_width_m,
                                             first, last - first + 1);
    const auto [mean, stddev] = profile_moments(summary.profile);
    summary.cv = mean > 0.0 ? stddev / mean : 0.0;
    return summary;
}

}  // namespace

bool CompensationStrategy::within_bounds() const {
    if (alpha < kAlphaMin || alpha > kAlphaMax) return false;
    if (clip_db < kClipDbMin || clip_db > kClipDbMax) return false;
    for (double g : sector_gains) {
        if (g < kGainMin || g > kGainMax) return false;
    }
    return true;
}

CompensationStrategy CompensationStrategy::clamped() const {
    CompensationStrategy out = *this;
    out.alpha = clampd(alpha, kAlphaMin, kAlphaMax);
    out.clip_db = clampd(clip_db, kClipDbMin, kClipDbMax);
    for (auto& g : out.sector_gains) g = clampd(g, kGainMin, kGainMax);
    return out;
}

bool CompensationStrategy::nearly_equal(const CompensationStrategy& other, double tol) const {
    if (std::abs(alpha - other.alpha) > tol) return false;
    if (std::abs(clip_db - other.clip_db) > tol) return false;
    for (std::size_t i = 0; i < sector_gains.size(); ++i) {
        if (std::abs(sector_gains[i] - other.sector_gains[i]) > tol) return false;
    }
    return true;
}

bool ScoreWeights::valid(double tol) const {
    if (effectiveness < 0 || accuracy < 0 || stability < 0) return false;
    return std::abs(effectiveness + accuracy + stability - 1.0) <= tol;
}

double path_loss_db(double distance_m, double wavelength_m) {
    if (distance_m <= 0.0) throw NonPositiveInput("path_loss_db: distance must be > 0");
    if (wavelength_m <= 0.0) throw NonPositiveInput("path_loss_db: wavelength must be > 0");
    return 20.0 * std::log10(4.0 * kPi * distance_m / wavelength_m);
}

double profile_bin_width(const SensorSetup& setup) { return 4.0 * setup.range_resolution_m; }

CompensationStateSummary summarize(const CloudWindow& window, const SensorSetup& setup,
                                   const ScenarioDescriptor& scenario) {
    return summarize_points(flatten(window), setup, scenario);
}

CloudWindow apply_strategy(const CloudWindow& window, const CompensationStrategy& strategy,
                           const SensorSetup& setup) {
    (void)setup;
    auto flat = flatten(window);
    const double clip_linear = std::pow(10.0, strategy.clip_db / 10.0);
    kernels::apply_gains(flat.pts, flat.energies, strategy.alpha, strategy.sector_gains,
                         clip_linear);
    CloudWindow out = window;
    std::size_t i = 0;
    for (auto& frame : out.frames) {
        for (auto& p : frame.points) p.energy = flat.energies[i++];
    }
    return out;
}

double score_effectiveness(const CompensationStateSummary& before,
                           const CompensationStateSummary& after) {
    if (before.cv <= 0.0) return 0.0;
    return clampd((before.cv - after.cv) / before.cv, 0.0, 1.0);
}

double score_accuracy(const CompensationStateSummary& after) {
    if (after.profile.empty()) return 1.0;
    const auto [mean, stddev] = profile_moments(after.profile);
    (void)stddev;
    if (mean <= 0.0) return 1.0;  // all-zero profile is trivially flat
    double mae = 0.0;
    for (double v : after.profile) mae += std::abs(v - mean);
    mae /= static_cast<double>(after.profile.size());
    return 1.0 - clampd(mae / mean, 0.0, 1.0);
}

double score_stability(const CloudWindow& window, const CompensationStrategy& strategy,
                       const SensorSetup& setup, const ScenarioDescriptor& scenario,
                       int splits) {
    return stability_of(apply_strategy(window, strategy, setup), setup, scenario, splits);
}

double stability_of(const CloudWindow& compensated, const SensorSetup& setup,
                    const ScenarioDescriptor& scenario, int splits) {
    if (splits < 1) throw InputError("score_stability: splits must be >= 1");
    const double slice_ms = compensated.duration_ms / splits;
    std::vector<double> accuracies;
    for (int s = 0; s < splits; ++s) {
        const double lo = compensated.start_ms + s * slice_ms;
        const double hi = lo + slice_ms;
        CloudWindow slice{lo, slice_ms, {}};
        for (const auto& frame : compensated.frames) {
            if (frame.timestamp_ms >= lo && frame.timestamp_ms < hi) {
                slice.frames.push_back(frame);
            }
        }
        if (slice.point_count() == 0) continue;
        accuracies.push_back(score_accuracy(summarize(slice, setup, scenario)));
    }
    if (accuracies.size() < 2) return 1.0;
    const auto [mean, stddev] = profile_moments(accuracies);
    (void)mean;
    return 1.0 - clampd(stddev / 0.5, 0.0, 1.0);
}

ScoreBreakdown compensation_score(double effectiveness, double accuracy, double stability,
                                  const ScoreWeights& weights) {
    if (!weights.valid()) {
        throw InputError("compensation_score: weights must be >= 0 and sum to 1");
    }
    ScoreBreakdown sb;
    sb.effectiveness = effectiveness;
    sb.accuracy = accuracy;
    sb.stability = stability;
    sb.weights = weights;
    sb.total = weights.effectiveness * effectiveness + weights.accuracy * accuracy +
               weights.stability * stability;
    return sb;
}

}  // namespace mmcount::compensation
