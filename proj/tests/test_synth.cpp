#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mmcount/synth.hpp"

using namespace mmcount;
using namespace mmcount::synth;

TEST_CASE("an empty scene emits empty frames") {
    SceneSpec spec;
    spec.n_persons = 0;
    spec.noise_rate = 0;
    spec.duration_s = 1.0;
    const auto scene = generate_scene(spec, SensorSetup{});
    CHECK(scene.frames.size() == 10);
    for (const auto& f : scene.frames) CHECK(f.points.empty());
}

TEST_CASE("the same seed reproduces the capture exactly") {
    SceneSpec spec;
    spec.duration_s = 2.0;
    spec.seed = 123;
    const auto a = generate_scene(spec, SensorSetup{});
    const auto b = generate_scene(spec, SensorSetup{});
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        REQUIRE(a.frames[i].points.size() == b.frames[i].points.size());
        for (std::size_t j = 0; j < a.frames[i].points.size(); ++j) {
            CHECK(a.frames[i].points[j].x == b.frames[i].points[j].x);
            CHECK(a.frames[i].points[j].energy == b.frames[i].points[j].energy);
        }
    }
}

TEST_CASE("cluster energy falls as inverse square of seat range") {
    // persons at 1 m and 2 m: mean energies should differ by about 4x
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SceneSpec spec;
        spec.n_persons = 2;
        spec.seats = {{0.0, 1.0}, {0.0, 2.0}};
        spec.duration_s = 10.0;
        spec.noise_rate = 0;
        spec.seed = seed;
        const auto scene = generate_scene(spec, SensorSetup{});
        double near_sum = 0, far_sum = 0;
        std::size_t near_n = 0, far_n = 0;
        for (const auto& f : scene.frames) {
            for (const auto& p : f.points) {
                const double d1 = std::hypot(p.x - 0.0, p.y - 1.0);
                const double d2 = std::hypot(p.x - 0.0, p.y - 2.0);
                if (d1 < d2) {
                    near_sum += p.energy;
                    ++near_n;
                } else {
                    far_sum += p.energy;
                    ++far_n;
                }
            }
        }
        ratio_sum += (far_sum / far_n) / (near_sum / near_n);
    }
    const double mean_ratio = ratio_sum / 10.0;
    CHECK(mean_ratio == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("person points stay within 3 sigma of their seat") {
    SceneSpec spec;
    spec.n_persons = 1;
    spec.seats = {{0.5, 1.5}};
    spec.duration_s = 5.0;
    spec.noise_rate = 0;
    const auto scene = generate_scene(spec, SensorSetup{});
    const double bound = 3.0 * spec.cluster_sigma_m + 1e-9;
    for (const auto& f : scene.frames) {
        for (const auto& p : f.points) {
            const double off =
                std::sqrt((p.x - 0.5) * (p.x - 0.5) + (p.y - 1.5) * (p.y - 1.5) + p.z * p.z);
            CHECK(off <= bound);
        }
    }
}

TEST_CASE("labeled noise fraction tracks the configured rate") {
    SceneSpec spec;
    spec.n_persons = 2;
    spec.seats = {{-0.4, 0.8}, {0.4, 1.6}};
    spec.duration_s = 20.0;
    spec.noise_rate = 12;
    spec.seed = 5;
    const auto scene = generate_scene(spec, SensorSetup{});
    std::size_t noise = 0, total = 0;
    for (const auto& f : scene.truth.frames) {
        for (bool label : f.noise_labels) {
            ++total;
            if (label) ++noise;
        }
    }
    const double expected = spec.noise_rate * static_cast<double>(scene.frames.size());
    CHECK(static_cast<double>(noise) == doctest::Approx(expected).epsilon(0.05));
    CHECK(total > noise);
}

TEST_CASE("noise labels align with frame point order") {
    SceneSpec spec;
    spec.duration_s = 1.0;
    const auto scene = generate_scene(spec, SensorSetup{});
    REQUIRE(scene.truth.frames.size() == scene.frames.size());
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
        CHECK(scene.truth.frames[i].noise_labels.size() == scene.frames[i].points.size());
    }
}

TEST_CASE("protocol sampling emits one window per tick") {
    SceneSpec minute;
    minute.duration_s = 60;
    CHECK(protocol_run(minute, 10.0).tick_ms.size() == 6);

    SceneSpec session;
    session.duration_s = 900;
    CHECK(protocol_run(session, 10.0).tick_ms.size() == 90);

    SceneSpec tiny;
    tiny.duration_s = 5;
    const auto sparse = protocol_run(tiny, 10.0);
    CHECK(sparse.tick_ms.empty());
    CHECK_FALSE(sparse.warnings.empty());
}

TEST_CASE("invalid scene specs are rejected") {
    SceneSpec spec;
    spec.n_persons = -1;
    CHECK_THROWS_AS(generate_scene(spec, SensorSetup{}), InvalidSpec);
    spec = SceneSpec{};
    spec.seats = {{0, 1}};  // length mismatch with n_persons = 3
    CHECK_THROWS_AS(generate_scene(spec, SensorSetup{}), InvalidSpec);
    spec = SceneSpec{};
    spec.duration_s = 0;
    CHECK_THROWS_AS(generate_scene(spec, SensorSetup{}), InvalidSpec);
    spec = SceneSpec{};
    spec.points_per_person_min = 9;
    spec.points_per_person_max = 5;
    CHECK_THROWS_AS(generate_scene(spec, SensorSetup{}), InvalidSpec);
}

TEST_CASE("ground truth round-trips through its JSON sidecar") {
    SceneSpec spec;
    spec.duration_s = 0.5;
    spec.seed = 77;
    const auto scene = generate_scene(spec, SensorSetup{});
    std::ostringstream out;
    write_ground_truth(out, scene.truth);
    std::istringstream in(out.str());
    const auto back = read_ground_truth(in);
    CHECK(back.n_persons == scene.truth.n_persons);
    CHECK(back.seed == scene.truth.seed);
    REQUIRE(back.frames.size() == scene.truth.frames.size());
    CHECK(back.frames[2].noise_labels == scene.truth.frames[2].noise_labels);
    CHECK(back.seats.size() == scene.truth.seats.size());
}
