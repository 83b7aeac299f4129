#include <doctest.h>

#include <cmath>
#include <limits>

#include "mmcount/json_io.hpp"
#include "mmcount/rng.hpp"
#include "mmcount/types.hpp"

using namespace mmcount;

TEST_CASE("validate_point accepts in-range points") {
    SensorSetup setup;
    const auto verdict = validate_point({1, 1, 0, 0.0, 5.0}, setup);
    CHECK(verdict.accepted);
}

TEST_CASE("validate_point rejects range overrun") {
    SensorSetup setup;  // max_range 50
    const auto verdict = validate_point({60, 0, 0, 0.0, 5.0}, setup);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.reason == "range-exceeded");
}

TEST_CASE("validate_point rejects negative energy") {
    SensorSetup setup;
    const auto verdict = validate_point({1, 0, 0, 0.0, -1.0}, setup);
    CHECK_FALSE(verdict.accepted);
    CHECK(verdict.reason == "negative-energy");
}

TEST_CASE("validate_point is total over arbitrary float inputs") {
    SensorSetup setup;
    rng::Engine rng(7);
    const double specials[] = {0.0, -0.0, std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity(),
                               std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::max()};
    for (int i = 0; i < 2000; ++i) {
        auto draw = [&]() -> double {
            if (rng.uniform() < 0.2) {
                return specials[rng.uniform_int(0, 5)];
            }
            return rng.uniform(-1e6, 1e6);
        };
        const RadarPoint p{draw(), draw(), draw(), draw(), draw()};
        CHECK_NOTHROW((void)validate_point(p, setup));
    }
}

TEST_CASE("sensor setup derives wavelength from frequency") {
    const auto setup = SensorSetup::with_frequency(77.0);
    CHECK(setup.wavelength_m == doctest::Approx(3.8934e-3).epsilon(1e-3));
    CHECK(setup.valid());
    SensorSetup broken = setup;
    broken.wavelength_m *= 1.001;
    CHECK_FALSE(broken.valid());
    broken = setup;
    broken.max_range_m = 0.0;
    CHECK_FALSE(broken.valid());
}

TEST_CASE("scenario enumerations use the fixed attribute strings") {
    CHECK(to_string(Material::NonMetallic) == "Non-Metallic");
    CHECK(to_string(Environment::Indoor) == "Indoor");
    CHECK(to_string(Obstacles::Unobstructed) == "Unobstructed");
    CHECK(material_from_string("Non-Metallic") == Material::NonMetallic);
    CHECK_THROWS_AS(environment_from_string("indoor"), InputError);
}

TEST_CASE("setup and scenario round-trip through JSON within 1e-9") {
    rng::Engine rng(11);
    for (int i = 0; i < 50; ++i) {
        SensorSetup setup = SensorSetup::with_frequency(rng.uniform(10, 120));
        setup.range_resolution_m = rng.uniform(0.01, 0.2);
        setup.doppler_resolution_mps = rng.uniform(0.01, 0.5);
        setup.max_range_m = rng.uniform(5, 80);
        setup.chirp_slope_mhz_per_us = rng.uniform(5, 100);
        setup.chirps_per_frame = static_cast<int>(rng.uniform_int(16, 256));
        const json j = setup;
        const auto back = j.get<SensorSetup>();
        CHECK(std::abs(back.frequency_ghz - setup.frequency_ghz) <=
              1e-9 * std::abs(setup.frequency_ghz));
        CHECK(std::abs(back.wavelength_m - setup.wavelength_m) <=
              1e-9 * std::abs(setup.wavelength_m));
        CHECK(std::abs(back.range_resolution_m - setup.range_resolution_m) <=
              1e-9 * std::abs(setup.range_resolution_m));
    }
    ScenarioDescriptor scenario;
    scenario.material = Material::Metallic;
    scenario.crowd_density = CrowdDensity::Dense;
    const json j = scenario;
    const auto back = j.get<ScenarioDescriptor>();
    CHECK(back.material == Material::Metallic);
    CHECK(back.crowd_density == CrowdDensity::Dense);
}

TEST_CASE("detection JSON round-trip") {
    const Detection d{1.25, 3.5, 0.75, "person"};
    const json j = d;
    const auto back = j.get<Detection>();
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);
    CHECK(back.confidence == d.confidence);
    CHECK(back.label == d.label);
}
