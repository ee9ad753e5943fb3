#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "surfgen/sdf_data.hpp"
#include "test_helpers.hpp"

using namespace surfgen;
using namespace surfgen::testing;

TEST_CASE("camera ring sits on the requested radius and spreads out") {
    const auto cams = camera_ring(50, 2.0);
    REQUIRE(cams.size() == 50);
    Vec3 total{};
    for (const auto& c : cams) {
        CHECK(norm(c) == doctest::Approx(2.0).epsilon(1e-12));
        total = total + c;
    }
    // Fibonacci spiral is nearly balanced; a clustered set would not be
    CHECK(norm(total) / 50.0 < 0.1);
    // min pairwise angle should be reasonable for 50 near-uniform points
    double min_dot = 1.0;
    for (std::size_t i = 0; i < cams.size(); ++i)
        for (std::size_t j = i + 1; j < cams.size(); ++j)
            min_dot = std::min(min_dot, 1.0 - dot(cams[i], cams[j]) / 4.0);
    CHECK(min_dot > 1e-3);
}

TEST_CASE("visibility sign recovers inside/outside of a sphere") {
    const auto mesh = make_icosphere(3, 0.5);
    const Bvh bvh(mesh);
    const auto cams = camera_ring(50, 2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-0.9, 0.9);
    const double sag = 0.5 - min_face_distance(mesh);
    for (int i = 0; i < 500; ++i) {
        const Vec3 p{uni(rng), uni(rng), uni(rng)};
        if (std::abs(norm(p) - 0.5) < 2.0 * sag) continue;  // skip the facet band
        const int expect = norm(p) < 0.5 ? -1 : 1;
        CHECK(sign_by_visibility(bvh, p, cams) == expect);
    }
}

TEST_CASE("signed_distance approximates the analytic sphere SDF") {
    const auto mesh = make_icosphere(4, 0.5);
    const Bvh bvh(mesh);
    const auto cams = camera_ring(50, 2.0);
    const double sag = 0.5 - min_face_distance(mesh);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-0.9, 0.9);
    for (int i = 0; i < 300; ++i) {
        const Vec3 p{uni(rng), uni(rng), uni(rng)};
        if (std::abs(norm(p) - 0.5) < 2.0 * sag) continue;
        CHECK(std::abs(signed_distance(bvh, p, cams) - sphere_sdf(p)) <= sag + 1e-12);
    }
}

TEST_CASE("visibility sign handles a torus hole") {
    const auto mesh = make_torus_mesh();
    const Bvh bvh(mesh);
    const auto cams = camera_ring(50, 2.0);
    CHECK(sign_by_visibility(bvh, {0, 0, 0}, cams) == 1);       // through the hole
    CHECK(sign_by_visibility(bvh, {0.5, 0, 0}, cams) == -1);    // inside the tube
    CHECK(sign_by_visibility(bvh, {0.9, 0, 0}, cams) == 1);     // outside
}

TEST_CASE("training samples follow the configured label convention") {
    const auto mesh = make_icosphere(4, 0.5);
    SamplingConfig config;
    config.n_near = 4000;
    config.n_uniform = 400;
    config.seed = 11;
    const auto samples = sample_training_points(mesh, config);
    REQUIRE(samples.size() == 4400);

    const double sag = 0.5 - min_face_distance(mesh);
    std::size_t near_band = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Vec3& p = samples.points[i];
        CHECK(norm(p) <= 1.0 + 0.05);  // unit ball plus Gaussian tail
        // label = signed distance minus the iso offset, within facet error
        const double expect = sphere_sdf(p) - config.offset;
        CHECK(std::abs(samples.signed_distances[i] - expect) <= sag + 1e-9);
        if (std::abs(sphere_sdf(p)) < 0.02) ++near_band;
    }
    // the 4000 near-surface samples concentrate at the surface
    CHECK(near_band > 3500);
}

TEST_CASE("training samples are deterministic per seed") {
    const auto mesh = make_icosphere(3, 0.5);
    SamplingConfig config;
    config.n_near = 500;
    config.n_uniform = 50;
    config.seed = 3;
    const auto a = sample_training_points(mesh, config);
    const auto b = sample_training_points(mesh, config);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(norm(a.points[i] - b.points[i]) == 0.0);
        CHECK(a.signed_distances[i] == b.signed_distances[i]);
    }
    config.seed = 4;
    const auto c = sample_training_points(mesh, config);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        differs = differs || norm(a.points[i] - c.points[i]) > 0.0;
    CHECK(differs);
}

TEST_CASE("inside fraction filter accepts solids and rejects shards") {
    const auto mesh = make_icosphere(3, 0.5);
    SamplingConfig config;
    config.n_near = 2000;
    config.n_uniform = 200;
    config.seed = 13;
    const auto good = sample_training_points(mesh, config);
    CHECK(inside_fraction_filter(good, config.offset));

    // everything strictly positive pre-offset -> rejected
    SdfSampleSet thin;
    for (int i = 0; i < 100; ++i) {
        thin.points.push_back({0, 0, 0});
        thin.signed_distances.push_back(0.01 - config.offset);
    }
    CHECK(!inside_fraction_filter(thin, config.offset));
}

TEST_CASE("SDFSAMPLES round trip keeps float32 precision") {
    SdfSampleSet samples;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 64; ++i) {
        samples.points.push_back({uni(rng), uni(rng), uni(rng)});
        samples.signed_distances.push_back(uni(rng));
    }
    const auto path = std::filesystem::temp_directory_path() / "surfgen_test.sdfsamples";
    save_sdf_samples(samples, path.string());
    const auto loaded = load_sdf_samples(path.string());
    REQUIRE(loaded.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(loaded.points[i].x == static_cast<float>(samples.points[i].x));
        CHECK(loaded.points[i].y == static_cast<float>(samples.points[i].y));
        CHECK(loaded.points[i].z == static_cast<float>(samples.points[i].z));
        CHECK(loaded.signed_distances[i] == static_cast<float>(samples.signed_distances[i]));
    }
    std::filesystem::remove(path);
}
