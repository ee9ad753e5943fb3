#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "surfgen/errors.hpp"
#include "surfgen/marching_cubes.hpp"
#include "surfgen/mesh.hpp"
#include "surfgen/mesh_to_field.hpp"
#include "surfgen/sdf_grid.hpp"
#include "test_helpers.hpp"

using namespace surfgen;
using namespace surfgen::testing;

TEST_CASE("marching cubes on an analytic sphere") {
    const auto grid = SdfGrid::from_function(64, [](Vec3 p) { return sphere_sdf(p); });
    const auto mesh = marching_cubes(grid);
    const double h = grid.spacing();
    REQUIRE(!mesh.empty());
    for (const auto& v : mesh.vertices) {
        CHECK(norm(v) >= 0.5 - h);
        CHECK(norm(v) <= 0.5 + h);
    }
    CHECK(euler_characteristic(mesh) == 2);
    CHECK(is_watertight(mesh));
}

TEST_CASE("marching cubes on an all-positive field is empty") {
    const auto grid = SdfGrid::from_function(16, [](Vec3) { return 1.0; });
    CHECK(marching_cubes(grid).empty());
}

TEST_CASE("marching cubes on an analytic torus") {
    const auto grid = SdfGrid::from_function(64, [](Vec3 p) { return torus_sdf(p); });
    const auto mesh = marching_cubes(grid);
    CHECK(euler_characteristic(mesh) == 0);
    CHECK(is_watertight(mesh));
}

TEST_CASE("marching cubes winding is outward for negative-inside fields") {
    const auto grid = SdfGrid::from_function(32, [](Vec3 p) { return sphere_sdf(p); });
    const auto mesh = marching_cubes(grid);
    double volume = 0.0;
    for (const auto& f : mesh.faces)
        volume += dot(mesh.vertices[f[0]],
                      cross(mesh.vertices[f[1]], mesh.vertices[f[2]])) / 6.0;
    CHECK(volume > 0.0);
}

TEST_CASE("extracted vertices sit on the zero crossing of the field") {
    const auto grid = SdfGrid::from_function(24, [](Vec3 p) { return torus_sdf(p); });
    const auto mesh = marching_cubes(grid);
    double max_abs = 0.0;
    for (double v : grid.values()) max_abs = std::max(max_abs, std::abs(v));
    for (const auto& v : mesh.vertices)
        CHECK(std::abs(grid.sample(v).value) <= 1e-6 * max_abs);
}

TEST_CASE("marching cubes with random fields yields 2-manifolds") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        // smooth random field: blend of a few spherical bumps, kept
        // negative only well inside the domain
        std::vector<Vec3> centers;
        for (int i = 0; i < 4; ++i) centers.push_back({uni(rng) * 0.4, uni(rng) * 0.4, uni(rng) * 0.4});
        const auto grid = SdfGrid::from_function(24, [&](Vec3 p) {
            double d = 1e9;
            for (const auto& c : centers) d = std::min(d, norm(p - c) - 0.3);
            return d;
        });
        const auto mesh = marching_cubes(grid, 1e-5);
        REQUIRE(!mesh.empty());
        CHECK(is_watertight(mesh));
    }
}

TEST_CASE("sample_field at a node returns the stored value") {
    const auto grid = SdfGrid::from_function(9, [](Vec3 p) { return p.x * p.y + p.z; });
    const Vec3 node = grid.node_position(3, 5, 2);
    CHECK(grid.sample(node).value == doctest::Approx(grid.at(3, 5, 2)).epsilon(1e-12));
}

TEST_CASE("sample_field reproduces linear fields exactly") {
    const auto grid = SdfGrid::from_function(9, [](Vec3 p) { return p.x; });
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-0.95, 0.95);
    for (int i = 0; i < 50; ++i) {
        const Vec3 p{uni(rng), uni(rng), uni(rng)};
        const auto s = grid.sample(p);
        CHECK(s.value == doctest::Approx(p.x).epsilon(1e-12));
        CHECK(s.gradient.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(s.gradient.y) < 1e-12);
        CHECK(std::abs(s.gradient.z) < 1e-12);
    }
}

TEST_CASE("sample_field gradient matches central finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> values;
    const int res = 12;
    for (int i = 0; i < res * res * res; ++i) values.push_back(uni(rng));
    const SdfGrid grid(res, values);
    const double h = grid.spacing();

    int tested = 0;
    while (tested < 100) {
        Vec3 p{uni(rng) * 0.9, uni(rng) * 0.9, uni(rng) * 0.9};
        // stay away from cell boundaries where the gradient jumps
        auto near_boundary = [&](double c) {
            const double u = (c + 1.0) / h;
            return std::abs(u - std::round(u)) < 0.1;
        };
        if (near_boundary(p.x) || near_boundary(p.y) || near_boundary(p.z)) continue;
        ++tested;
        const auto s = grid.sample(p);
        const double fd_h = h / 1000.0;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 dp = p, dm = p;
            dp[axis] += fd_h;
            dm[axis] -= fd_h;
            const double fd = (grid.sample(dp).value - grid.sample(dm).value) / (2.0 * fd_h);
            CHECK(s.gradient[axis] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("sample_field rejects out-of-domain points") {
    const auto grid = SdfGrid::from_function(4, [](Vec3) { return 0.0; });
    CHECK_THROWS_AS(grid.sample({1.5, 0, 0}), OutOfDomainError);
}

TEST_CASE("route_surface_gradient with dL/dv = n(v) gives adjoint -omega per vertex") {
    const auto grid = SdfGrid::from_function(32, [](Vec3 p) { return sphere_sdf(p); });
    const auto mesh = marching_cubes(grid);
    std::vector<Vec3> grads(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        grads[i] = normalized(grid.sample(mesh.vertices[i]).gradient);
    const auto result = route_surface_gradient(mesh, grid, grads, 1.0);
    CHECK(result.degenerate_normals == 0);
    // trilinear weights sum to 1, so the total routed mass is -1 per vertex
    double total = 0.0;
    for (double g : result.field_grads) total += g;
    CHECK(total == doctest::Approx(-static_cast<double>(mesh.vertices.size())).epsilon(1e-9));
}

TEST_CASE("route_surface_gradient of zero gradients is zero") {
    const auto grid = SdfGrid::from_function(16, [](Vec3 p) { return sphere_sdf(p); });
    const auto mesh = marching_cubes(grid);
    const std::vector<Vec3> zeros(mesh.vertices.size());
    const auto result = route_surface_gradient(mesh, grid, zeros);
    for (double g : result.field_grads) CHECK(g == 0.0);
}

TEST_CASE("route_surface_gradient drops components orthogonal to the normal") {
    // linear field s = x has normal (1,0,0) everywhere; a y-gradient at a
    // single vertex routes nothing
    const auto grid = SdfGrid::from_function(8, [](Vec3 p) { return p.x; });
    TriangleMesh mesh;
    mesh.vertices = {grid.node_position(4, 3, 3), {0.1, 0.2, 0.3}, {0.3, 0.1, 0.2}};
    mesh.faces = {{0, 1, 2}};
    std::vector<Vec3> grads(3);
    grads[0] = {0, 1, 0};
    const auto result = route_surface_gradient(mesh, grid, grads, 1.0);
    for (double g : result.field_grads) CHECK(g == 0.0);
}

TEST_CASE("route_surface_gradient is linear in the vertex gradients") {
    const auto grid = SdfGrid::from_function(16, [](Vec3 p) { return sphere_sdf(p); });
    const auto mesh = marching_cubes(grid);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec3> g1(mesh.vertices.size()), g2(mesh.vertices.size()), sum(mesh.vertices.size());
    for (std::size_t i = 0; i < g1.size(); ++i) {
        g1[i] = {gauss(rng), gauss(rng), gauss(rng)};
        g2[i] = {gauss(rng), gauss(rng), gauss(rng)};
        sum[i] = g1[i] + g2[i];
    }
    const auto r1 = route_surface_gradient(mesh, grid, g1);
    const auto r2 = route_surface_gradient(mesh, grid, g2);
    const auto rs = route_surface_gradient(mesh, grid, sum);
    for (std::size_t i = 0; i < rs.field_grads.size(); ++i)
        CHECK(rs.field_grads[i] ==
              doctest::Approx(r1.field_grads[i] + r2.field_grads[i]).epsilon(1e-10));
}

TEST_CASE("normalize_to_unit_sphere on a cube") {
    TriangleMesh mesh;
    for (int i = 0; i < 8; ++i)
        mesh.vertices.push_back({i & 1 ? 2.0 : -2.0, i & 2 ? 2.0 : -2.0, i & 4 ? 2.0 : -2.0});
    mesh.faces = {{0, 1, 2}};
    const auto out = normalize_to_unit_sphere(mesh);
    const double c = 1.0 / std::sqrt(3.0);
    for (const auto& v : out.vertices) {
        CHECK(std::abs(std::abs(v.x) - c) < 1e-12);
        CHECK(std::abs(std::abs(v.y) - c) < 1e-12);
        CHECK(std::abs(std::abs(v.z) - c) < 1e-12);
    }
}

TEST_CASE("normalize_to_unit_sphere is idempotent") {
    const auto mesh = normalize_to_unit_sphere(make_icosphere(2, 0.7));
    const auto again = normalize_to_unit_sphere(mesh);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(norm(again.vertices[i] - mesh.vertices[i]) < 1e-12);
}

TEST_CASE("normalize_to_unit_sphere recenters a translated icosphere") {
    const auto mesh = translate(make_icosphere(3, 0.5), {3, 0, 0});
    const auto out = normalize_to_unit_sphere(mesh);
    Vec3 lo = out.vertices[0], hi = out.vertices[0];
    double max_norm = 0.0;
    for (const auto& v : out.vertices) {
        lo = min3(lo, v);
        hi = max3(hi, v);
        max_norm = std::max(max_norm, norm(v));
    }
    CHECK(norm(lo + hi) < 1e-9);
    CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalize_to_unit_sphere rejects empty meshes") {
    CHECK_THROWS_AS(normalize_to_unit_sphere(TriangleMesh{}), EmptyMeshError);
}

TEST_CASE("OBJ round trip") {
    const auto mesh = make_icosphere(1, 0.5);
    const auto path = std::filesystem::temp_directory_path() / "surfgen_test.obj";
    save_obj(mesh, path.string());
    const auto loaded = load_obj(path.string());
    REQUIRE(loaded.vertices.size() == mesh.vertices.size());
    REQUIRE(loaded.faces.size() == mesh.faces.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK(norm(loaded.vertices[i] - mesh.vertices[i]) < 1e-15);
    CHECK(loaded.faces == mesh.faces);
    std::filesystem::remove(path);
}

TEST_CASE("SDFGRID round trip keeps float32 precision") {
    const auto grid = SdfGrid::from_function(8, [](Vec3 p) { return sphere_sdf(p); });
    const auto path = std::filesystem::temp_directory_path() / "surfgen_test.sdfgrid";
    save_sdf_grid(grid, path.string());
    const auto loaded = load_sdf_grid(path.string());
    REQUIRE(loaded.resolution() == 8);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(loaded.values()[i] ==
              doctest::Approx(static_cast<float>(grid.values()[i])).epsilon(1e-12));
    std::filesystem::remove(path);
}
