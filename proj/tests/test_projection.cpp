#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "surfgen/gradcheck.hpp"
#include "surfgen/projection.hpp"
#include "test_helpers.hpp"

using namespace surfgen;
using namespace surfgen::testing;

namespace {

// single hand-built ray so forward values can be computed on paper
RaySet one_ray(const SphereGrid& grid, const Vec3& origin, const Vec3& dir) {
    RaySet rays;
    rays.grid = &grid;
    rays.mode = RayMode::Radial;
    rays.origins = {origin};
    rays.directions = {normalized(dir)};
    rays.valid = {1};
    return rays;
}

TriangleMesh one_triangle() {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.faces = {{0, 1, 2}};
    return mesh;
}

}  // namespace

TEST_CASE("radial depth of an icosphere is radius-accurate") {
    const auto mesh = make_icosphere(4, 0.5);
    const auto grid = healpix_grid(8);
    const auto [map, tape] = project_forward(mesh, make_rays(grid, RayMode::Radial), {});
    const auto* depth = map.find("radial_depth");
    const auto* sil = map.find("radial_sil");
    REQUIRE(depth);
    REQUIRE(sil);
    const double sag = 0.5 - min_face_distance(mesh);  // facet chord error
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
        CHECK(depth->valid[i] == 1);
        CHECK(std::abs(depth->values[i] - 0.5) <= sag + 1e-12);
        CHECK(sil->values[i] == 1.0);
    }
}

TEST_CASE("orthographic depth of an icosphere matches the analytic sphere") {
    const auto mesh = make_icosphere(4, 0.5);
    const auto grid = healpix_grid(8);
    const auto [map, tape] = project_forward(mesh, make_rays(grid, RayMode::Orthographic), {});
    const auto* depth = map.find("ortho_depth");
    REQUIRE(depth);
    const double sag = 0.5 - min_face_distance(mesh);
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
        const Vec3 o = grid.directions[i];
        const double rho2 = o.x * o.x + o.y * o.y;
        if (rho2 < 0.25 - 0.05) {  // safely inside the silhouette
            const double expect = std::abs(o.z) - std::sqrt(0.25 - rho2);
            CHECK(std::abs(depth->values[i] - expect) <= 2.0 * sag + 1e-12);
        } else if (rho2 > 0.25 + 0.05) {  // safely outside
            CHECK(depth->values[i] == 2.0);
        }
    }
}

TEST_CASE("constructed near miss gives occupancy exp(-1)") {
    const auto grid = equirect_grid(1, 1);
    const auto mesh = one_triangle();
    ProjectionConfig config;
    config.r = 0.02;
    config.delta = 1e-4;
    // ray passes the edge y=0 at distance sqrt(delta) = 0.01 < r
    const auto rays = one_ray(grid, {0.5, -0.01, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, config);
    const auto* sil = map.find("radial_sil");
    const auto* depth = map.find("radial_depth");
    REQUIRE(sil);
    CHECK(sil->values[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(depth->values[0] == 2.0);  // no direct hit -> background
}

TEST_CASE("two stacked near misses compound through the product") {
    const auto grid = equirect_grid(1, 1);
    TriangleMesh mesh = one_triangle();
    // second copy of the triangle at z = -0.5, same ray distance
    mesh.vertices.push_back({0, 0, -0.5});
    mesh.vertices.push_back({1, 0, -0.5});
    mesh.vertices.push_back({0, 1, -0.5});
    mesh.faces.push_back({3, 4, 5});
    ProjectionConfig config;
    const auto rays = one_ray(grid, {0.5, -0.01, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, config);
    const double a = std::exp(-1.0);
    CHECK(map.find("radial_sil")->values[0] ==
          doctest::Approx(1.0 - (1.0 - a) * (1.0 - a)).epsilon(1e-9));
}

TEST_CASE("direct hit depth uses the barycentric reconstruction") {
    const auto grid = equirect_grid(1, 1);
    const auto mesh = one_triangle();
    const auto rays = one_ray(grid, {0.25, 0.25, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, {});
    CHECK(map.find("radial_depth")->values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(map.find("radial_sil")->values[0] == 1.0);
    REQUIRE(tape.depth_hits.size() == 1);
    CHECK(norm(tape.depth_hits[0].point - Vec3{0.25, 0.25, 0.0}) < 1e-12);
}

TEST_CASE("replay reproduces the forward channels bit for bit") {
    const auto mesh = make_icosphere(3, 0.5);
    const auto grid = healpix_grid(8);
    for (RayMode mode : {RayMode::Radial, RayMode::Orthographic}) {
        const auto [map, tape] = project_forward(mesh, make_rays(grid, mode), {});
        std::vector<double> depth, sil;
        replay_tape(tape, mesh, depth, sil);
        const auto* dch = map.find(mode == RayMode::Radial ? "radial_depth" : "ortho_depth");
        const auto* sch = map.find(mode == RayMode::Radial ? "radial_sil" : "ortho_sil");
        REQUIRE(depth.size() == dch->values.size());
        for (std::size_t i = 0; i < depth.size(); ++i) {
            CHECK(depth[i] == dch->values[i]);
            CHECK(sil[i] == sch->values[i]);
        }
    }
}

TEST_CASE("depth gradient matches finite differences on a single triangle") {
    const auto grid = equirect_grid(1, 1);
    TriangleMesh mesh = one_triangle();
    const auto rays = one_ray(grid, {0.2, 0.3, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, {});
    MapGrads adj;
    adj.depth = {1.0};
    const auto grads = project_backward(tape, mesh, adj);
    REQUIRE(grads.size() == 3);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vec3> dv(3);
        double analytic = 0.0;
        for (int i = 0; i < 3; ++i) {
            dv[i] = {gauss(rng), gauss(rng), gauss(rng)};
            analytic += dot(grads[i], dv[i]);
        }
        const double h = 1e-7;
        auto eval = [&](double sign) {
            TriangleMesh m = mesh;
            for (int i = 0; i < 3; ++i) m.vertices[i] = m.vertices[i] + dv[i] * (sign * h);
            std::vector<double> depth, sil;
            replay_tape(tape, m, depth, sil);
            return depth[0];
        };
        const double fd = (eval(1.0) - eval(-1.0)) / (2.0 * h);
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("silhouette gradient matches finite differences on a near miss") {
    const auto grid = equirect_grid(1, 1);
    TriangleMesh mesh = one_triangle();
    ProjectionConfig config;
    const auto rays = one_ray(grid, {0.5, -0.01, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, config);
    MapGrads adj;
    adj.sil = {1.0};
    const auto grads = project_backward(tape, mesh, adj);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vec3> dv(3);
        double analytic = 0.0;
        for (int i = 0; i < 3; ++i) {
            dv[i] = {gauss(rng), gauss(rng), gauss(rng)};
            analytic += dot(grads[i], dv[i]);
        }
        const double h = 1e-7;
        auto eval = [&](double sign) {
            TriangleMesh m = mesh;
            for (int i = 0; i < 3; ++i) m.vertices[i] = m.vertices[i] + dv[i] * (sign * h);
            std::vector<double> depth, sil;
            replay_tape(tape, m, depth, sil);
            return sil[0];
        };
        const double fd = (eval(1.0) - eval(-1.0)) / (2.0 * h);
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("direct hits freeze the silhouette at one") {
    const auto grid = equirect_grid(1, 1);
    TriangleMesh mesh = one_triangle();
    const auto rays = one_ray(grid, {0.25, 0.25, 1.0}, {0, 0, -1});
    const auto [map, tape] = project_forward(mesh, rays, {});
    MapGrads adj;
    adj.sil = {1.0};
    const auto grads = project_backward(tape, mesh, adj);
    for (const auto& g : grads) CHECK(norm(g) == 0.0);
}

TEST_CASE("vector-Jacobian products pass the randomized gradient check") {
    const auto mesh = make_icosphere(3, 0.5);
    const auto grid = healpix_grid(8);
    const auto report = gradient_check(mesh, grid, {}, 16, 2024);
    INFO("depth ", report.max_rel_err_depth, " sil ", report.max_rel_err_sil);
    CHECK(report.pass(1e-4, 1e-3));
}

TEST_CASE("gradient check holds on a torus too") {
    const auto mesh = make_torus_mesh(36, 18);
    const auto grid = healpix_grid(8);
    const auto report = gradient_check(mesh, grid, {}, 8, 99);
    INFO("depth ", report.max_rel_err_depth, " sil ", report.max_rel_err_sil);
    CHECK(report.pass(1e-4, 1e-3));
}

TEST_CASE("mask_depth_gradient zeroes non-fully-occupied pixels") {
    const std::vector<double> grads{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> occ{1.0, 0.5, 1.0, 0.999};
    const auto masked = mask_depth_gradient(grads, occ);
    CHECK(masked == std::vector<double>{1.0, 0.0, 3.0, 0.0});
}

TEST_CASE("full projection carries the three standard channels") {
    const auto mesh = make_icosphere(2, 0.5);
    const auto grid = healpix_grid(4);
    const auto map = full_projection(mesh, grid, {});
    CHECK(map.find("radial_depth"));
    CHECK(map.find("ortho_depth"));
    CHECK(map.find("ortho_sil"));
    CHECK(!map.find("radial_sil"));
    ProjectionConfig all;
    all.all_channels = true;
    CHECK(full_projection(mesh, grid, all).find("radial_sil"));
}

TEST_CASE("sphmap round trip") {
    const auto mesh = make_icosphere(2, 0.5);
    const auto grid = healpix_grid(4);
    const auto map = full_projection(mesh, grid, {});
    const auto path = std::filesystem::temp_directory_path() / "surfgen_test.sphmap";
    save_sphmap(map, path.string());
    SphereGrid storage;
    const auto loaded = load_sphmap(path.string(), storage);
    REQUIRE(storage == grid);
    REQUIRE(loaded.channels.size() == map.channels.size());
    for (std::size_t c = 0; c < map.channels.size(); ++c) {
        CHECK(loaded.channels[c].name == map.channels[c].name);
        CHECK(loaded.channels[c].valid == map.channels[c].valid);
        for (std::size_t i = 0; i < map.channels[c].values.size(); ++i)
            CHECK(loaded.channels[c].values[i] ==
                  doctest::Approx(static_cast<float>(map.channels[c].values[i])).epsilon(1e-12));
    }
    std::filesystem::remove(path);
}

TEST_CASE("parallel and serial projections agree exactly") {
    const auto mesh = make_icosphere(3, 0.5);
    const auto grid = healpix_grid(8);
    ProjectionConfig serial;
    serial.threads = 1;
    ProjectionConfig parallel;
    parallel.threads = 4;
    const auto a = full_projection(mesh, grid, serial);
    const auto b = full_projection(mesh, grid, parallel);
    REQUIRE(a.channels.size() == b.channels.size());
    for (std::size_t c = 0; c < a.channels.size(); ++c)
        CHECK(a.channels[c].values == b.channels[c].values);
}
