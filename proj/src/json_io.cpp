#include "mmcount/json_io.hpp"

namespace mmcount {

void to_json(json& j, const SensorSetup& s) {
    j = json{{"frequency_ghz", s.frequency_ghz},
             {"chirp_slope_mhz_per_us", s.chirp_slope_mhz_per_us},
             {"chirps_per_frame", s.chirps_per_frame},
             {"range_resolution_m", s.range_resolution_m},
             {"doppler_resolution_mps", s.doppler_resolution_mps},
             {"max_range_m", s.max_range_m},
             {"wavelength_m", s.wavelength_m}};
}

void from_json(const json& j, SensorSetup& s) {
    j.at("frequency_ghz").get_to(s.frequency_ghz);
    j.at("chirp_slope_mhz_per_us").get_to(s.chirp_slope_mhz_per_us);
    j.at("chirps_per_frame").get_to(s.chirps_per_frame);
    j.at("range_resolution_m").get_to(s.range_resolution_m);
    j.at("doppler_resolution_mps").get_to(s.doppler_resolution_mps);
    j.at("max_range_m").get_to(s.max_range_m);
    if (j.contains("wavelength_m")) {
        j.at("wavelength_m").get_to(s.wavelength_m);
    } else {
        s.wavelength_m = kSpeedOfLight / (s.frequency_ghz * 1e9);
    }
}

void to_json(json& j, const ScenarioDescriptor& s) {
    j = json{{"environment", to_string(s.environment)},
             {"surface", to_string(s.surface)},
             {"material", to_string(s.material)},
             {"crowd_density", to_string(s.crowd_density)},
             {"motion", to_string(s.motion)},
             {"obstacles", to_string(s.obstacles)}};
}

void from_json(const json& j, ScenarioDescriptor& s) {
    s.environment = environment_from_string(j.at("environment").get<std::string>());
    s.surface = surface_from_string(j.at("surface").get<std::string>());
    s.material = material_from_string(j.at("material").get<std::string>());
    s.crowd_density = crowd_density_from_string(j.at("crowd_density").get<std::string>());
    s.motion = motion_from_string(j.at("motion").get<std::string>());
    s.obstacles = obstacles_from_string(j.at("obstacles").get<std::string>());
}

void to_json(json& j, const Detection& d) {
    j = json{{"x", d.x}, {"y", d.y}, {"confidence", d.confidence}, {"label", d.label}};
}

void from_json(const json& j, Detection& d) {
    j.at("x").get_to(d.x);
    j.at("y").get_to(d.y);
    j.at("confidence").get_to(d.confidence);
    d.label = j.value("label", "person");
}

}  // namespace mmcount

namespace mmcount::compensation {

void to_json(json& j, const CompensationStrategy& s) {
    j = json{{"alpha", s.alpha}, {"sector_gains", s.sector_gains}, {"clip_db", s.clip_db}};
}

void from_json(const json& j, CompensationStrategy& s) {
    j.at("alpha").get_to(s.alpha);
    const auto gains = j.at("sector_gains").get<std::vector<double>>();
    if (gains.size() != s.sector_gains.size()) {
        throw InputError("strategy must carry 8 sector gains");
    }
    std::copy(gains.begin(), gains.end(), s.sector_gains.begin());
    j.at("clip_db").get_to(s.clip_db);
}

void to_json(json& j, const ScoreBreakdown& sb) {
    j = json{{"effectiveness", sb.effectiveness},
             {"accuracy", sb.accuracy},
             {"stability", sb.stability},
             {"weights", {sb.weights.effectiveness, sb.weights.accuracy, sb.weights.stability}},
             {"total", sb.total}};
}

}  // namespace mmcount::compensation
