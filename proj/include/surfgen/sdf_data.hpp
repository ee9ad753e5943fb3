#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfgen/bvh.hpp"
#include "surfgen/mesh.hpp"
#include "surfgen/vec3.hpp"

namespace surfgen {

struct SdfSampleSet {
    std::vector<Vec3> points;
    std::vector<double> signed_distances;

    std::size_t size() const { return points.size(); }
};

struct SamplingConfig {
    std::size_t n_near = 475000;
    std::size_t n_uniform = 25000;
    double sigma1 = 0.005;
    double sigma2 = 0.0005;
    double offset = 2e-3;  // subtracted from every label
    int n_views = 50;
    double camera_radius = 2.0;
    std::uint64_t seed = 0;
};

/// n_views camera positions on a Fibonacci spiral at the given radius.
std::vector<Vec3> camera_ring(int n_views, double radius);

/// +1 when any camera sees p along an unobstructed open segment, else -1.
int sign_by_visibility(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& cameras);

/// Visibility sign times the unsigned distance to the closest surface point.
double signed_distance(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& cameras);

/// Near-surface samples (Gaussian-perturbed surface points, half sigma1,
/// half sigma2) plus uniform samples in the unit ball, labeled by
/// signed_distance with the negative iso offset applied.
SdfSampleSet sample_training_points(const TriangleMesh& mesh, const SamplingConfig& config);

/// Keep iff the fraction of negative raw (pre-offset) signs is >= threshold.
bool inside_fraction_filter(const SdfSampleSet& samples, double offset, double threshold = 0.005);

// "SDFSAMPLES v1 n=<int>" header + n * 4 little-endian float32 (x,y,z,d).
SdfSampleSet load_sdf_samples(const std::string& path);
void save_sdf_samples(const SdfSampleSet& samples, const std::string& path);

}  // namespace surfgen
