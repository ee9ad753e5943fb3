#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "surfgen/metrics.hpp"
#include "test_helpers.hpp"

using namespace surfgen;
using namespace surfgen::testing;

namespace {

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> uni(-scale, scale);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({uni(rng), uni(rng), uni(rng)});
    return c;
}

// exhaustive assignment oracle for tiny inputs
double emd_permutation_oracle(const PointCloud& a, const PointCloud& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i)
            cost += norm(a.points[i] - b.points[perm[i]]);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

PointCloud single(const Vec3& p) { return PointCloud{{p}}; }

}  // namespace

TEST_CASE("surface samples land on the mesh and are deterministic") {
    const auto mesh = make_icosphere(4, 0.5);
    const auto a = sample_surface(mesh, 2000, 42);
    const auto b = sample_surface(mesh, 2000, 42);
    const auto c = sample_surface(mesh, 2000, 43);
    REQUIRE(a.size() == 2000);
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        identical = identical && norm(a.points[i] - b.points[i]) == 0.0;
        differs = differs || norm(a.points[i] - c.points[i]) > 0.0;
    }
    CHECK(identical);
    CHECK(differs);
    const double lo = min_face_distance(mesh);
    for (const auto& p : a.points) {
        CHECK(norm(p) >= lo - 1e-12);
        CHECK(norm(p) <= 0.5 + 1e-12);
    }
}

TEST_CASE("surface sampling is area uniform across octants") {
    const auto mesh = make_icosphere(4, 0.5);
    const auto cloud = sample_surface(mesh, 16000, 7);
    std::array<int, 8> counts{};
    for (const auto& p : cloud.points)
        ++counts[(p.x > 0) | ((p.y > 0) << 1) | ((p.z > 0) << 2)];
    for (int c : counts) {
        CHECK(c > 1700);  // expectation 2000, generous 7-sigma band
        CHECK(c < 2300);
    }
}

TEST_CASE("chamfer distance hand example") {
    PointCloud a{{{0, 0, 0}, {1, 0, 0}}};
    PointCloud b{{{0, 0, 1}}};
    // a->b: (1 + 2)/2, b->a: 1
    CHECK(chamfer(a, b) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(chamfer(b, a) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(chamfer(a, a) == 0.0);
}

TEST_CASE("chamfer shrinks as clouds approach") {
    const auto mesh = make_icosphere(3, 0.5);
    const auto target = sample_surface(mesh, 512, 1);
    const auto near = sample_surface(make_icosphere(3, 0.48), 512, 2);
    const auto far = sample_surface(make_icosphere(3, 0.3), 512, 3);
    CHECK(chamfer(near, target) < chamfer(far, target));
}

TEST_CASE("exact EMD matches the permutation oracle") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = random_cloud(6, rng);
        const auto b = random_cloud(6, rng);
        CHECK(emd(a, b) == doctest::Approx(emd_permutation_oracle(a, b)).epsilon(1e-9));
    }
}

TEST_CASE("EMD of a cloud against a permutation of itself is zero") {
    std::mt19937_64 rng(13);
    auto a = random_cloud(64, rng);
    auto b = a;
    std::shuffle(b.points.begin(), b.points.end(), rng);
    CHECK(emd(a, b) == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-9));
}

TEST_CASE("auction EMD stays within its additive bound of the exact solver") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        const auto a = random_cloud(96, rng);
        const auto b = random_cloud(96, rng);
        const double exact = emd(a, b, 512);
        const double approx = emd(a, b, 8);  // force the auction path
        CHECK(approx >= exact - 1e-12);
        CHECK(approx - exact <= 1e-3 + 1e-9);
    }
}

TEST_CASE("EMD rejects size mismatches") {
    std::mt19937_64 rng(19);
    CHECK_THROWS(emd(random_cloud(4, rng), random_cloud(5, rng)));
}

TEST_CASE("MMD and COV hand examples") {
    const std::vector<PointCloud> test{single({0.1, 0, 0}), single({0.9, 0, 0})};

    const std::vector<PointCloud> spread{single({0, 0, 0}), single({1, 0, 0})};
    auto r = mmd_cov(spread, test, CloudMetric::CD);
    CHECK(r.mmd == doctest::Approx(0.02).epsilon(1e-12));  // 2 * 0.1^2 each
    CHECK(r.cov == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<PointCloud> clumped{single({0, 0, 0}), single({0.05, 0, 0})};
    r = mmd_cov(clumped, test, CloudMetric::CD);
    // both generated shapes sit nearest t0; t1 still contributes its own min
    // t0: min(2*0.01, 2*0.0025); t1: min(2*0.81, 2*0.7225)
    CHECK(r.mmd == doctest::Approx((0.005 + 1.445) / 2.0).epsilon(1e-9));
    CHECK(r.cov == doctest::Approx(0.5).epsilon(1e-12));

    r = mmd_cov(spread, test, CloudMetric::EMD);
    CHECK(r.mmd == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("JSD hand example on a 2^3 lattice") {
    // generated mass in one cell; test split between that cell and another
    const std::vector<PointCloud> generated{
        PointCloud{{{-0.5, -0.5, -0.5}, {-0.6, -0.5, -0.5}}}};
    const std::vector<PointCloud> test{
        PointCloud{{{-0.5, -0.5, -0.5}, {0.5, -0.5, -0.5}}}};
    // P=[1,0], Q=[1/2,1/2], M=[3/4,1/4]
    const double expect =
        0.5 * (std::log(4.0 / 3.0) +
               0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0));
    CHECK(jsd(generated, test, 2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(0.2157616).epsilon(1e-5));
}

TEST_CASE("JSD of identical pooled distributions is zero") {
    std::mt19937_64 rng(23);
    const auto cloud = random_cloud(500, rng, 0.9);
    CHECK(jsd({cloud}, {cloud}) == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-12));
}

TEST_CASE("XYZ round trip") {
    std::mt19937_64 rng(29);
    const auto cloud = random_cloud(100, rng);
    const auto path = std::filesystem::temp_directory_path() / "surfgen_test.xyz";
    save_xyz(cloud, path.string());
    const auto loaded = load_xyz(path.string());
    REQUIRE(loaded.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(norm(loaded.points[i] - cloud.points[i]) < 1e-12);
    std::filesystem::remove(path);
}
