#pragma once

#include <array>
#include <string>
#include <vector>

#include "mmcount/types.hpp"

namespace mmcount::compensation {

/// Bounds of the strategy parameter space.
inline constexpr double kAlphaMin = 1.0;
inline constexpr double kAlphaMax = 3.0;
inline constexpr double kGainMin = 0.5;
inline constexpr double kGainMax = 2.0;
inline constexpr double kClipDbMin = 0.0;
inline constexpr double kClipDbMax = 40.0;
inline constexpr double kReferenceRangeM = 1.0;

/// A parameterized gain transform: per-point energy is multiplied by
/// min(10^(clip_db/10), (r/r_ref)^alpha) * sector_gain(azimuth). The eight
/// gains cover 22.5-degree azimuth sectors of the front half-plane.
struct CompensationStrategy {
    double alpha = 2.0;
    std::array<double, 8> sector_gains = {1, 1, 1, 1, 1, 1, 1, 1};
    double clip_db = 40.0;

    bool within_bounds() const;
    CompensationStrategy clamped() const;
    /// Componentwise equality within tol, used to reject duplicate proposals.
    bool nearly_equal(const CompensationStrategy& other, double tol) const;
};

/// (E, A, S) weighted into the scalar compensation score W.
struct ScoreWeights {
    double effectiveness = 1.0 / 3.0;
    double accuracy = 1.0 / 3.0;
    double stability = 1.0 / 3.0;

    bool valid(double tol = 1e-9) const;
};

struct ScoreBreakdown {
    double effectiveness = 0.0;  // E, [0,1]
    double accuracy = 0.0;       // A, [0,1]
    double stability = 0.0;      // S, [0,1]
    ScoreWeights weights;
    double total = 0.0;          // W = mu1*E + mu2*A + mu3*S
};

/// Range-binned view of a window's energy distribution: the MCTS state.
/// profile[i] is the mean energy of points whose range falls in bin
/// (first_bin + i); the span runs from the first to the last occupied bin
/// and zero-valued gap bins inside the span count as values. cv is the
/// population coefficient of variation of the profile (0 for empty or
/// zero-mean profiles).
struct CompensationStateSummary {
    std::vector<double> profile;
    std::size_t first_bin = 0;
    double bin_width_m = 0.0;
    double cv = 0.0;
    ScenarioDescriptor scenario;
    std::string setup_digest;
};

/// Free-space loss 20*log10(4*pi*d/lambda) in dB; the reflection term is out
/// of scope. Throws NonPositiveInput for d <= 0 or lambda <= 0.
double path_loss_db(double distance_m, double wavelength_m);

/// Bin width is 4x the range resolution to keep profiles stable on 200 ms
/// windows.
double profile_bin_width(const SensorSetup& setup);

CompensationStateSummary summarize(const CloudWindow& window, const SensorSetup& setup,
                                   const ScenarioDescriptor& scenario);

/// Energy-only transform; positions, dopplers, and point count are
/// preserved.
CloudWindow apply_strategy(const CloudWindow& window, const CompensationStrategy& strategy,
                           const SensorSetup& setup);

/// E = clamp((CV_before - CV_after)/CV_before, 0, 1); 0 when CV_before = 0.
double score_effectiveness(const CompensationStateSummary& before,
                           const CompensationStateSummary& after);

/// A = 1 - clamp(MAE(profile, mean)/mean, 0, 1) against the flat target;
/// an empty profile is trivially flat (A = 1).
double score_accuracy(const CompensationStateSummary& after);

/// Split the window into `splits` equal time slices, score A on each
/// compensated slice; S = 1 - clamp(stddev(A)/0.5, 0, 1). Slices without
/// points are skipped; fewer than 2 non-empty slices yield S = 1.
double score_stability(const CloudWindow& window, const CompensationStrategy& strategy,
                       const SensorSetup& setup, const ScenarioDescriptor& scenario,
                       int splits = 4);

/// Same slice scoring over a window whose energies are already final (no
/// further gain applied).
double stability_of(const CloudWindow& compensated, const SensorSetup& setup,
                    const ScenarioDescriptor& scenario, int splits = 4);

ScoreBreakdown compensation_score(double effectiveness, double accuracy, double stability,
                                  const ScoreWeights& weights);

}  // namespace mmcount::compensation
