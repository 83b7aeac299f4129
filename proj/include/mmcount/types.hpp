#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmcount {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// ---------------------------------------------------------------------------
// Errors. exit_code feeds the CLI: 2 input error, 3 agent unavailable,
// 4 internal invariant violation.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg, 2) {}
};

class MalformedRecord : public InputError {
public:
    MalformedRecord(std::size_t line, const std::string& reason)
        : InputError("malformed record at line " + std::to_string(line) + ": " + reason),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EmptyCapture : public InputError {
public:
    EmptyCapture() : InputError("capture contains no frames") {}
};

class InvalidStride : public InputError {
public:
    explicit InvalidStride(const std::string& msg) : InputError(msg) {}
};

class InvalidSpec : public InputError {
public:
    explicit InvalidSpec(const std::string& msg) : InputError(msg) {}
};

class MismatchedExtent : public InputError {
public:
    explicit MismatchedExtent(const std::string& msg) : InputError(msg) {}
};

class NonPositiveInput : public InputError {
public:
    explicit NonPositiveInput(const std::string& msg) : InputError(msg) {}
};

class AgentUnavailable : public Error {
public:
    explicit AgentUnavailable(const std::string& msg) : Error(msg, 3) {}
};

class MalformedAgentReply : public Error {
public:
    explicit MalformedAgentReply(const std::string& msg) : Error(msg, 3) {}
};

class DepthExceeded : public Error {
public:
    explicit DepthExceeded(const std::string& msg) : Error(msg, 4) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(msg, 4) {}
};

// ---------------------------------------------------------------------------
// Domain types. Radar-centric Cartesian coordinates, radar at the origin,
// y pointing forward. All types are immutable-by-convention after
// construction and safe to share across threads.
// ---------------------------------------------------------------------------

/// One reflector returned by the radar: position, radial velocity, and the
/// dimensionless reflected-signal intensity.
struct RadarPoint {
    double x = 0.0;        // m
    double y = 0.0;        // m
    double z = 0.0;        // m
    double doppler = 0.0;  // m/s, relative radial velocity
    double energy = 0.0;   // dimensionless, >= 0

    double range() const { return std::sqrt(x * x + y * y + z * z); }
};

/// One radar measurement interval. May be empty in a quiet interval.
struct Frame {
    std::int64_t index = 0;
    double timestamp_ms = 0.0;  // since capture start
    std::vector<RadarPoint> points;
};

/// Fixed-duration slice of consecutive frames; the unit of enhancement and
/// detection. Frame timestamps lie in [start_ms, start_ms + duration_ms).
struct CloudWindow {
    double start_ms = 0.0;
    double duration_ms = 200.0;
    std::vector<Frame> frames;

    std::size_t point_count() const {
        std::size_t n = 0;
        for (const auto& f : frames) n += f.points.size();
        return n;
    }
};

/// Sensor configuration, the auxiliary modality fed to the agent.
/// wavelength_m is derived: c / (frequency_ghz * 1e9).
struct SensorSetup {
    double frequency_ghz = 77.0;
    double chirp_slope_mhz_per_us = 29.982;
    int chirps_per_frame = 128;
    double range_resolution_m = 0.044;
    double doppler_resolution_mps = 0.13;
    double max_range_m = 50.0;
    double wavelength_m = kSpeedOfLight / 77.0e9;

    static SensorSetup with_frequency(double frequency_ghz);
    /// True when all physical quantities are positive and wavelength matches
    /// the derived value within 1e-9 relative tolerance.
    bool valid() const;
};

enum class Environment { Indoor, Outdoor };
enum class Surface { Smooth, Rough };
enum class Material { Metallic, NonMetallic };
enum class CrowdDensity { Sparse, Dense };
enum class Motion { Static, Dynamic };
enum class Obstacles { Obstructed, Unobstructed };

/// Six two-valued attributes describing the working scenario. Serialized
/// strings are fixed so agent prompts stay stable.
struct ScenarioDescriptor {
    Environment environment = Environment::Indoor;
    Surface surface = Surface::Smooth;
    Material material = Material::NonMetallic;
    CrowdDensity crowd_density = CrowdDensity::Sparse;
    Motion motion = Motion::Static;
    Obstacles obstacles = Obstacles::Unobstructed;
};

std::string to_string(Environment v);
std::string to_string(Surface v);
std::string to_string(Material v);
std::string to_string(CrowdDensity v);
std::string to_string(Motion v);
std::string to_string(Obstacles v);

Environment environment_from_string(const std::string& s);
Surface surface_from_string(const std::string& s);
Material material_from_string(const std::string& s);
CrowdDensity crowd_density_from_string(const std::string& s);
Motion motion_from_string(const std::string& s);
Obstacles obstacles_from_string(const std::string& s);

/// Per-individual annotation produced by crowd detection.
struct Detection {
    double x = 0.0;  // m
    double y = 0.0;  // m
    double confidence = 1.0;  // [0,1]
    std::string label = "person";
};

// ---------------------------------------------------------------------------
// Validation. Rejection is a value, not an error; validate_point never
// throws for any finite-float input.
// ---------------------------------------------------------------------------

struct ValidationVerdict {
    bool accepted = true;
    std::string reason;  // empty when accepted

    static ValidationVerdict accept() { return {true, {}}; }
    static ValidationVerdict reject(std::string why) { return {false, std::move(why)}; }
};

ValidationVerdict validate_point(const RadarPoint& p, const SensorSetup& setup);

}  // namespace mmcount
