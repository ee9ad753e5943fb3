// Timing comparison of the accelerated paths against their serial
// references: BVH vs brute-force raycasting, OpenMP vs single-thread
// projection. Prints one line per case; not a correctness test.
#include <chrono>
#include <cstdio>
#include <random>

#include "surfgen/bvh.hpp"
#include "surfgen/marching_cubes.hpp"
#include "surfgen/projection.hpp"
#include "surfgen/sdf_grid.hpp"
#include "surfgen/sphere_grid.hpp"

using namespace surfgen;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TriangleMesh bench_mesh() {
    const auto grid = SdfGrid::from_function(96, [](Vec3 p) {
        const double q = std::sqrt(p.x * p.x + p.y * p.y) - 0.5;
        return std::sqrt(q * q + p.z * p.z) - 0.2;
    });
    return marching_cubes(grid);
}

}  // namespace

int main() {
    const auto mesh = bench_mesh();
    std::printf("mesh: %zu vertices, %zu faces\n\n", mesh.vertices.size(), mesh.faces.size());

    const Bvh bvh(mesh);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Ray> rays;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 o = normalized(Vec3{gauss(rng), gauss(rng), gauss(rng)});
        rays.push_back({o, -o});
    }

    auto t0 = Clock::now();
    std::size_t hits_bvh = 0;
    for (const auto& ray : rays) hits_bvh += bvh.ray_intersect_k(ray, 8, 0.02).size();
    const double bvh_s = seconds_since(t0);

    t0 = Clock::now();
    std::size_t hits_brute = 0;
    for (const auto& ray : rays) hits_brute += ray_intersect_k_brute(mesh, ray, 8, 0.02).size();
    const double brute_s = seconds_since(t0);

    std::printf("raycast, %zu rays k=8 r=0.02\n", rays.size());
    std::printf("  bvh    %8.4f s  (%zu hits)\n", bvh_s, hits_bvh);
    std::printf("  brute  %8.4f s  (%zu hits)  speedup %.1fx\n\n", brute_s, hits_brute,
                brute_s / bvh_s);

    const auto grid = healpix_grid(32);
    ProjectionConfig serial;
    serial.threads = 1;
    ProjectionConfig parallel;  // library default thread count

    t0 = Clock::now();
    full_projection(mesh, grid, serial);
    const double serial_s = seconds_since(t0);

    t0 = Clock::now();
    full_projection(mesh, grid, parallel);
    const double parallel_s = seconds_since(t0);

    std::printf("full_projection, nside=32 (%zu pixels x 2 modes)\n", grid.pixel_count());
    std::printf("  serial    %8.4f s\n", serial_s);
    std::printf("  parallel  %8.4f s  speedup %.1fx\n", parallel_s, serial_s / parallel_s);
    return 0;
}
