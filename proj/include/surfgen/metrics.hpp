#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfgen/mesh.hpp"
#include "surfgen/vec3.hpp"

namespace surfgen {

struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
};

/// n area-uniform surface samples: face chosen proportional to area,
/// position by uniform barycentric sampling. Deterministic per seed.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Symmetric sum of mean squared nearest-neighbor distances.
double chamfer(const PointCloud& a, const PointCloud& b);

/// (1/n) * min over bijections of the summed (unsquared) Euclidean
/// matching cost. Exact shortest-augmenting-path solver up to
/// `exact_limit` points, epsilon-scaling auction above (additive bound
/// 1e-3 * n on the summed cost).
double emd(const PointCloud& a, const PointCloud& b, std::size_t exact_limit = 512);

enum class CloudMetric { CD, EMD };

struct MmdCov {
    double mmd = 0.0;
    double cov = 0.0;
};

/// MMD: mean over test shapes of the distance to the closest generated
/// shape. COV: fraction of test shapes that are the argmin (lowest index
/// on ties) for at least one generated shape.
MmdCov mmd_cov(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& test,
               CloudMetric metric);

/// Jensen-Shannon divergence (natural log) between occupancy histograms
/// of the pooled point sets over a grid_res^3 lattice on [-1,1]^3.
double jsd(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& test,
           int grid_res = 28);

// XYZ text I/O: one "x y z" per line.
PointCloud load_xyz(const std::string& path);
void save_xyz(const PointCloud& cloud, const std::string& path);

}  // namespace surfgen
