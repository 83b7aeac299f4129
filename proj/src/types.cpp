#include "mmcount/types.hpp"

#include <cmath>

namespace mmcount {

SensorSetup SensorSetup::with_frequency(double frequency_ghz) {
    SensorSetup s;
    s.frequency_ghz = frequency_ghz;
    s.wavelength_m = kSpeedOfLight / (frequency_ghz * 1e9);
    return s;
}

bool SensorSetup::valid() const {
    const bool positive = frequency_ghz > 0 && chirp_slope_mhz_per_us > 0 &&
                          chirps_per_frame > 0 && range_resolution_m > 0 &&
                          doppler_resolution_mps > 0 && max_range_m > 0 &&
                          wavelength_m > 0;
    if (!positive) return false;
    const double derived = kSpeedOfLight / (frequency_ghz * 1e9);
    return std::abs(wavelength_m - derived) <= 1e-9 * derived;
}

std::string to_string(Environment v) { return v == Environment::Indoor ? "Indoor" : "Outdoor"; }
std::string to_string(Surface v) { return v == Surface::Smooth ? "Smooth" : "Rough"; }
std::string to_string(Material v) { return v == Material::Metallic ? "Metallic" : "Non-Metallic"; }
std::string to_string(CrowdDensity v) { return v == CrowdDensity::Sparse ? "Sparse" : "Dense"; }
std::string to_string(Motion v) { return v == Motion::Static ? "Static" : "Dynamic"; }
std::string to_string(Obstacles v) { return v == Obstacles::Obstructed ? "Obstructed" : "Unobstructed"; }

namespace {

[[noreturn]] void bad_enum(const std::string& what, const std::string& s) {
    throw InputError("unknown " + what + " value: '" + s + "'");
}

}  // namespace

Environment environment_from_string(const std::string& s) {
    if (s == "Indoor") return Environment::Indoor;
    if (s == "Outdoor") return Environment::Outdoor;
    bad_enum("environment", s);
}

Surface surface_from_string(const std::string& s) {
    if (s == "Smooth") return Surface::Smooth;
    if (s == "Rough") return Surface::Rough;
    bad_enum("surface", s);
}

Material material_from_string(const std::string& s) {
    if (s == "Metallic") return Material::Metallic;
    if (s == "Non-Metallic" || s == "NonMetallic") return Material::NonMetallic;
    bad_enum("material", s);
}

CrowdDensity crowd_density_from_string(const std::string& s) {
    if (s == "Sparse") return CrowdDensity::Sparse;
    if (s == "Dense") return CrowdDensity::Dense;
    bad_enum("crowd_density", s);
}

Motion motion_from_string(const std::string& s) {
    if (s == "Static") return Motion::Static;
    if (s == "Dynamic") return Motion::Dynamic;
    bad_enum("motion", s);
}

Obstacles obstacles_from_string(const std::string& s) {
    if (s == "Obstructed") return Obstacles::Obstructed;
    if (s == "Unobstructed") return Obstacles::Unobstructed;
    bad_enum("obstacles", s);
}

ValidationVerdict validate_point(const RadarPoint& p, const SensorSetup& setup) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.doppler) || !std::isfinite(p.energy)) {
        return ValidationVerdict::reject("non-finite");
    }
    if (p.energy < 0.0) return ValidationVerdict::reject("negative-energy");
    if (p.range() > setup.max_range_m) return ValidationVerdict::reject("range-exceeded");
    return ValidationVerdict::accept();
}

}  // namespace mmcount
