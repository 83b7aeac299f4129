#include "mmcount/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "mmcount/json_io.hpp"
#include "mmcount/rng.hpp"

namespace mmcount::synth {

namespace {

void check_spec(const SceneSpec& spec) {
    if (spec.n_persons < 0) throw InvalidSpec("n_persons must be >= 0");
    if (!spec.seats.empty() && static_cast<int>(spec.seats.size()) != spec.n_persons) {
        throw InvalidSpec("seat list length must equal n_persons");
    }
    if (spec.duration_s <= 0) throw InvalidSpec("duration_s must be > 0");
    if (spec.frame_rate <= 0) throw InvalidSpec("frame_rate must be > 0");
    if (spec.noise_rate < 0) throw InvalidSpec("noise_rate must be >= 0");
    if (spec.points_per_person_min < 1 ||
        spec.points_per_person_max < spec.points_per_person_min) {
        throw InvalidSpec("points_per_person range is invalid");
    }
    if (spec.cluster_sigma_m <= 0) throw InvalidSpec("cluster_sigma_m must be > 0");
    if (spec.attenuation_exponent < 0) throw InvalidSpec("attenuation_exponent must be >= 0");
    if (spec.noise_energy_min < 0 || spec.noise_energy_max < spec.noise_energy_min) {
        throw InvalidSpec("noise energy range is invalid");
    }
    if (!(spec.region.x_max > spec.region.x_min) || !(spec.region.y_max > spec.region.y_min)) {
        throw InvalidSpec("region extent is degenerate");
    }
}

std::vector<Seat> sample_seats(const SceneSpec& spec, rng::Engine& engine) {
    // Experiment-protocol band: 0.4-2.0 m in front of the radar.
    std::vector<Seat> seats;
    for (int p = 0; p < spec.n_persons; ++p) {
        Seat seat;
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double r = engine.uniform(0.4, 2.0);
            const double azimuth = engine.uniform(-0.7, 0.7);  // rad
            seat = {r * std::sin(azimuth), r * std::cos(azimuth)};
            bool clear = true;
            for (const auto& other : seats) {
                const double dx = seat.x - other.x, dy = seat.y - other.y;
                if (std::sqrt(dx * dx + dy * dy) < 0.5) {
                    clear = false;
                    break;
                }
            }
            if (clear) break;
        }
        seats.push_back(seat);
    }
    return seats;
}

}  // namespace

double Seat::range() const { return std::sqrt(x * x + y * y); }

Scene generate_scene(const SceneSpec& spec, const SensorSetup& setup) {
    check_spec(spec);
    (void)setup;
    rng::Engine engine(spec.seed);

    Scene scene;
    scene.truth.n_persons = spec.n_persons;
    scene.truth.extent = spec.region;
    scene.truth.seed = spec.seed;
    scene.truth.frame_rate = spec.frame_rate;
    scene.truth.seats = spec.seats.empty() ? sample_seats(spec, engine) : spec.seats;

    const auto n_frames =
        static_cast<std::int64_t>(std::llround(spec.duration_s * spec.frame_rate));
    const double frame_ms = 1000.0 / spec.frame_rate;
    const double sigma = spec.cluster_sigma_m;
    const double max_offset = 3.0 * sigma;

    for (std::int64_t f = 0; f < n_frames; ++f) {
        Frame frame;
        frame.index = f;
        frame.timestamp_ms = static_cast<double>(f) * frame_ms;
        GroundTruthFrame gt_frame;
        gt_frame.index = f;
        gt_frame.timestamp_ms = frame.timestamp_ms;
        gt_frame.persons = scene.truth.seats;

        for (const auto& seat : scene.truth.seats) {
            const auto count = engine.uniform_int(spec.points_per_person_min,
                                                  spec.points_per_person_max);
            for (std::int64_t i = 0; i < count; ++i) {
                double ox = engine.normal(0.0, sigma);
                double oy = engine.normal(0.0, sigma);
                double oz = engine.normal(0.0, sigma);
                const double norm = std::sqrt(ox * ox + oy * oy + oz * oz);
                if (norm > max_offset) {
                    const double scale = max_offset / norm;
                    ox *= scale;
                    oy *= scale;
                    oz *= scale;
                }
                RadarPoint p;
                p.x = seat.x + ox;
                p.y = seat.y + oy;
                p.z = oz;
                p.doppler = engine.uniform(-spec.doppler_jitter_mps, spec.doppler_jitter_mps);
                const double base =
                    engine.lognormal(spec.base_energy_log_mean, spec.base_energy_log_sigma);
                const double r = std::max(p.range(), 1e-3);
                p.energy = base * std::pow(1.0 / r, spec.attenuation_exponent);
                frame.points.push_back(p);
                gt_frame.noise_labels.push_back(false);
            }
        }

        auto noise_count = static_cast<std::int64_t>(std::floor(spec.noise_rate));
        const double frac = spec.noise_rate - std::floor(spec.noise_rate);
        if (frac > 0.0 && engine.uniform() < frac) ++noise_count;
        for (std::int64_t i = 0; i < noise_count; ++i) {
            RadarPoint p;
            p.x = engine.uniform(spec.region.x_min, spec.region.x_max);
            p.y = engine.uniform(std::max(spec.region.y_min, 0.2), spec.region.y_max);
            p.z = engine.uniform(0.0, 1.5);
            p.doppler = engine.uniform(-0.3, 0.3);
            p.energy = engine.uniform(spec.noise_energy_min, spec.noise_energy_max);
            frame.points.push_back(p);
            gt_frame.noise_labels.push_back(true);
        }

        scene.frames.push_back(std::move(frame));
        scene.truth.frames.push_back(std::move(gt_frame));
    }
    return scene;
}

ProtocolSamples protocol_run(const SceneSpec& spec, double sample_every_s) {
    check_spec(spec);
    if (sample_every_s <= 0) throw InvalidSpec("sample_every_s must be > 0");
    ProtocolSamples samples;
    const auto n = static_cast<std::int64_t>(std::floor(spec.duration_s / sample_every_s));
    for (std::int64_t i = 0; i < n; ++i) {
        samples.tick_ms.push_back(static_cast<double>(i) * sample_every_s * 1000.0);
    }
    if (samples.tick_ms.empty()) {
        samples.warnings.push_back("sampling interval exceeds the session; no samples emitted");
    }
    return samples;
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
    json doc;
    doc["n_persons"] = gt.n_persons;
    doc["seed"] = gt.seed;
    doc["frame_rate"] = gt.frame_rate;
    doc["extent"] = {{"x_min", gt.extent.x_min},
                     {"x_max", gt.extent.x_max},
                     {"y_min", gt.extent.y_min},
                     {"y_max", gt.extent.y_max}};
    auto& seats = doc["seats"] = json::array();
    for (const auto& s : gt.seats) seats.push_back(json::array({s.x, s.y}));
    auto& frames = doc["frames"] = json::array();
    for (const auto& f : gt.frames) {
        json jf;
        jf["index"] = f.index;
        jf["timestamp_ms"] = f.timestamp_ms;
        auto& persons = jf["persons"] = json::array();
        for (const auto& s : f.persons) persons.push_back(json::array({s.x, s.y}));
        auto& labels = jf["noise_labels"] = json::array();
        for (bool b : f.noise_labels) labels.push_back(b ? 1 : 0);
        frames.push_back(std::move(jf));
    }
    out << doc.dump(2) << '\n';
}

GroundTruth read_ground_truth(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid ground-truth document: ") + e.what());
    }
    GroundTruth gt;
    try {
        gt.n_persons = doc.at("n_persons").get<int>();
        gt.seed = doc.value("seed", 0ull);
        gt.frame_rate = doc.value("frame_rate", 0.0);
        const auto& je = doc.at("extent");
        gt.extent = {je.at("x_min").get<double>(), je.at("x_max").get<double>(),
                     je.at("y_min").get<double>(), je.at("y_max").get<double>()};
        for (const auto& js : doc.at("seats")) {
            gt.seats.push_back({js.at(0).get<double>(), js.at(1).get<double>()});
        }
        for (const auto& jf : doc.at("frames")) {
            GroundTruthFrame f;
            f.index = jf.at("index").get<std::int64_t>();
            f.timestamp_ms = jf.at("timestamp_ms").get<double>();
            for (const auto& js : jf.at("persons")) {
                f.persons.push_back({js.at(0).get<double>(), js.at(1).get<double>()});
            }
            for (const auto& jl : jf.at("noise_labels")) {
                f.noise_labels.push_back(jl.get<int>() != 0);
            }
            gt.frames.push_back(std::move(f));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid ground-truth document: ") + e.what());
    }
    return gt;
}

SceneSpec scene_spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scene spec: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("invalid scene spec: ") + e.what());
    }
    SceneSpec spec;
    try {
        spec.n_persons = doc.value("n_persons", spec.n_persons);
        if (doc.contains("seats")) {
            for (const auto& js : doc.at("seats")) {
                spec.seats.push_back({js.at(0).get<double>(), js.at(1).get<double>()});
            }
        }
        spec.duration_s = doc.value("duration_s", spec.duration_s);
        spec.frame_rate = doc.value("frame_rate", spec.frame_rate);
        spec.noise_rate = doc.value("noise_rate", spec.noise_rate);
        spec.seed = doc.value("seed", spec.seed);
        spec.points_per_person_min = doc.value("points_per_person_min", spec.points_per_person_min);
        spec.points_per_person_max = doc.value("points_per_person_max", spec.points_per_person_max);
        spec.cluster_sigma_m = doc.value("cluster_sigma_m", spec.cluster_sigma_m);
        spec.doppler_jitter_mps = doc.value("doppler_jitter_mps", spec.doppler_jitter_mps);
        spec.attenuation_exponent = doc.value("attenuation_exponent", spec.attenuation_exponent);
        spec.base_energy_log_mean = doc.value("base_energy_log_mean", spec.base_energy_log_mean);
        spec.base_energy_log_sigma = doc.value("base_energy_log_sigma", spec.base_energy_log_sigma);
        spec.noise_energy_min = doc.value("noise_energy_min", spec.noise_energy_min);
        spec.noise_energy_max = doc.value("noise_energy_max", spec.noise_energy_max);
        if (doc.contains("region")) {
            const auto& jr = doc.at("region");
            spec.region = {jr.at("x_min").get<double>(), jr.at("x_max").get<double>(),
                           jr.at("y_min").get<double>(), jr.at("y_max").get<double>()};
        }
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("invalid scene spec: ") + e.what());
    }
    return spec;
}

}  // namespace mmcount::synth
