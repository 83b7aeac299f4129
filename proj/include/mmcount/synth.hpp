#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmcount/kernels.hpp"
#include "mmcount/types.hpp"

namespace mmcount::synth {

using kernels::Extent2D;

struct Seat {
    double x = 0.0;
    double y = 0.0;

    double range() const;
};

/// Scene description. Seats are radar-relative (x, y) at z = 0; when empty,
/// n_persons seats are sampled inside the 0.4-2.0 m band. Energies are drawn
/// from a log-normal base and attenuated by (1/r)^attenuation_exponent
/// (free-space, normalized to 1 m), so the ground-truth compensation
/// exponent is known by construction.
struct SceneSpec {
    int n_persons = 3;
    std::vector<Seat> seats;
    double duration_s = 60.0;
    double frame_rate = 10.0;
    double noise_rate = 25.0;  // uniform background points per frame
    std::uint64_t seed = 0;

    int points_per_person_min = 8;
    int points_per_person_max = 15;
    double cluster_sigma_m = 0.12;
    double doppler_jitter_mps = 0.05;
    double attenuation_exponent = 2.0;
    double base_energy_log_mean = 3.0;  // exp(3) ~ 20
    double base_energy_log_sigma = 0.25;
    double noise_energy_min = 0.2;
    double noise_energy_max = 1.5;
    Extent2D region{-3.0, 3.0, 0.0, 6.0};  // room extent; noise spawns inside
};

struct GroundTruthFrame {
    std::int64_t index = 0;
    double timestamp_ms = 0.0;
    std::vector<Seat> persons;
    std::vector<bool> noise_labels;  // aligned with the capture frame's points
};

struct GroundTruth {
    int n_persons = 0;
    std::vector<Seat> seats;
    Extent2D extent;
    std::uint64_t seed = 0;
    double frame_rate = 0.0;
    std::vector<GroundTruthFrame> frames;
};

struct Scene {
    std::vector<Frame> frames;
    GroundTruth truth;
};

Scene generate_scene(const SceneSpec& spec, const SensorSetup& setup);

struct ProtocolSamples {
    std::vector<double> tick_ms;  // evaluation window start times
    std::vector<std::string> warnings;
};

/// One evaluation tick every sample_every_s over the session (the scene
/// duration); ticks start at 0. Zero ticks produce a warning, not an error.
ProtocolSamples protocol_run(const SceneSpec& spec, double sample_every_s = 10.0);

void write_ground_truth(std::ostream& out, const GroundTruth& gt);
GroundTruth read_ground_truth(std::istream& in);

SceneSpec scene_spec_from_json_file(const std::string& path);

}  // namespace mmcount::synth
