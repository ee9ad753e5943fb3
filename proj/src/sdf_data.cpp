#include "surfgen/sdf_data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "surfgen/errors.hpp"
#include "surfgen/metrics.hpp"

namespace surfgen {

std::vector<Vec3> camera_ring(int n_views, double radius) {
    std::vector<Vec3> cameras;
    cameras.reserve(static_cast<std::size_t>(n_views));
    // Fibonacci spiral: evenly spread z slices, golden-angle azimuth steps
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_views; ++i) {
        const double z = n_views == 1 ? 1.0 : 1.0 - 2.0 * (i + 0.5) / n_views;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        cameras.push_back(Vec3{rho * std::cos(phi), rho * std::sin(phi), z} * radius);
    }
    return cameras;
}

int sign_by_visibility(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& cameras) {
    for (const auto& c : cameras)
        if (!bvh.segment_occluded(c, p)) return +1;
    return -1;
}

double signed_distance(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& cameras) {
    const ClosestPoint cp = bvh.closest_point(p);
    return sign_by_visibility(bvh, p, cameras) * std::sqrt(cp.sq_dist);
}

SdfSampleSet sample_training_points(const TriangleMesh& mesh, const SamplingConfig& config) {
    if (mesh.empty()) throw EmptyMeshError();
    const Bvh bvh(mesh);
    const auto cameras = camera_ring(config.n_views, config.camera_radius);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    const PointCloud surface = sample_surface(mesh, config.n_near, config.seed ^ 0x51f5ULL);
    SdfSampleSet set;
    set.points.reserve(config.n_near + config.n_uniform);

    for (std::size_t i = 0; i < config.n_near; ++i) {
        const double sigma = i < config.n_near / 2 ? config.sigma1 : config.sigma2;
        Vec3 p = surface.points[i] + Vec3{gauss(rng), gauss(rng), gauss(rng)} * sigma;
        set.points.push_back(p);
    }
    std::size_t added = 0;
    while (added < config.n_uniform) {  // rejection sample the unit ball
        const Vec3 p{uni(rng), uni(rng), uni(rng)};
        if (norm2(p) > 1.0) continue;
        set.points.push_back(p);
        ++added;
    }

    set.signed_distances.resize(set.points.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(set.points.size()); ++i)
        set.signed_distances[i] = signed_distance(bvh, set.points[i], cameras) - config.offset;
    return set;
}

bool inside_fraction_filter(const SdfSampleSet& samples, double offset, double threshold) {
    if (samples.size() == 0) throw Error("inside_fraction_filter on empty sample set");
    std::size_t negative = 0;
    for (double d : samples.signed_distances)
        if (d + offset < 0.0) ++negative;  // raw, pre-offset sign
    return static_cast<double>(negative) / static_cast<double>(samples.size()) >= threshold;
}

SdfSampleSet load_sdf_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sample file: " + path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic, version, ntok;
    hs >> magic >> version >> ntok;
    if (magic != "SDFSAMPLES" || version != "v1" || ntok.rfind("n=", 0) != 0)
        throw IoError("bad SDFSAMPLES header: " + header);
    const auto n = static_cast<std::size_t>(std::stoull(ntok.substr(2)));
    SdfSampleSet set;
    set.points.resize(n);
    set.signed_distances.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        float rec[4];
        in.read(reinterpret_cast<char*>(rec), sizeof(rec));
        if (!in) throw IoError("truncated sample file: " + path);
        set.points[i] = {rec[0], rec[1], rec[2]};
        set.signed_distances[i] = rec[3];
    }
    return set;
}

void save_sdf_samples(const SdfSampleSet& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write sample file: " + path);
    out << "SDFSAMPLES v1 n=" << samples.size() << "\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const float rec[4] = {static_cast<float>(samples.points[i].x),
                              static_cast<float>(samples.points[i].y),
                              static_cast<float>(samples.points[i].z),
                              static_cast<float>(samples.signed_distances[i])};
        out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace surfgen
