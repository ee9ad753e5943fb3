#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surfgen/bvh.hpp"
#include "surfgen/mesh.hpp"
#include "surfgen/sphere_grid.hpp"

namespace surfgen {

struct ChannelData {
    std::string name;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;
};

/// Per-pixel depth and occupancy channels over a sphere grid. Depth uses
/// a background sentinel on no-hit and invalid pixels; silhouettes are 0
/// there.
struct SphericalMap {
    const SphereGrid* grid = nullptr;
    double background_depth = 2.0;
    std::vector<ChannelData> channels;

    const ChannelData* find(const std::string& name) const;
    ChannelData* find(const std::string& name);
};

struct ProjectionConfig {
    int k = 8;
    double r = 0.02;
    double delta = 1e-4;       // decay scale of exp(-sq_dist/delta), units length^2
    double background = 2.0;   // max chord of the unit sphere
    double eps_equator = 1e-9;
    bool all_channels = false;  // include radial_sil
    int threads = 0;            // 0 = library default
};

/// Everything needed to replay the forward formulas without re-tracing:
/// recorded hit points are constants, vertex positions are the variables.
struct ProjectionTape {
    struct DepthHit {           // nearest direct hit per pixel with one
        std::uint32_t pixel;    // (depth channel contributor)
        std::uint32_t face;
        Vec3 point;             // frozen intersection point p
    };
    struct SilHit {             // every hit contributing to Eq.-11 product
        std::uint32_t pixel;
        std::uint32_t face;
        Vec3 ray_point;         // frozen closest point on the ray p'
        std::uint8_t direct;    // direct hits contribute alpha = 1, no gradient
    };

    RayMode mode = RayMode::Radial;
    std::size_t n_pixels = 0;
    std::size_t n_vertices = 0;
    double delta = 0.0;
    double background = 0.0;
    std::vector<Vec3> ray_origins;
    std::vector<std::uint8_t> valid;
    std::vector<DepthHit> depth_hits;
    std::vector<SilHit> sil_hits;             // sorted by pixel
    std::vector<std::uint32_t> sil_offsets;   // n_pixels + 1 prefix offsets
};

/// Forward spherical projection of one ray set: per-pixel depth (distance
/// from the ray origin to the barycentric-interpolated nearest direct hit)
/// and soft occupancy 1 - prod_j(1 - alpha_j), alpha_j = exp(-d_j/delta)
/// for near misses and 1 for direct hits. Returns the two channels named
/// after the ray mode plus the tape for the backward pass.
std::pair<SphericalMap, ProjectionTape> project_forward(const TriangleMesh& mesh,
                                                        const RaySet& rays,
                                                        const ProjectionConfig& config);

/// Replays the tape formulas at the given vertex positions; with the
/// forward-pass vertices this reproduces the forward map exactly. The
/// independent target of finite-difference gradient checks.
void replay_tape(const ProjectionTape& tape, const TriangleMesh& mesh,
                 std::vector<double>& depth, std::vector<double>& sil);

struct MapGrads {
    std::vector<double> depth;  // per-pixel adjoints, empty = all zero
    std::vector<double> sil;
};

/// Reverse-mode gradients of the tape replay w.r.t. mesh vertices.
/// Recorded hit points are constants; depth flows through the area-ratio
/// barycentric weights and the vertex coordinates, silhouette through the
/// clamped closest-point distance.
std::vector<Vec3> project_backward(const ProjectionTape& tape, const TriangleMesh& mesh,
                                   const MapGrads& map_grads, int threads = 0);

/// Zeroes depth adjoints wherever the target occupancy is below 1.
std::vector<double> mask_depth_gradient(const std::vector<double>& depth_grads,
                                        const std::vector<double>& target_occupancy);

/// The combined 3-channel map {radial_depth, ortho_depth, ortho_sil}
/// (radial_sil added when config.all_channels).
SphericalMap full_projection(const TriangleMesh& mesh, const SphereGrid& grid,
                             const ProjectionConfig& config);

struct FullProjection {
    SphericalMap map;
    ProjectionTape radial_tape;
    ProjectionTape ortho_tape;
};

FullProjection full_projection_with_tape(const TriangleMesh& mesh, const SphereGrid& grid,
                                         const ProjectionConfig& config);

// .sphmap: one-line JSON header, then channel-major little-endian float32.
void save_sphmap(const SphericalMap& map, const std::string& path);
SphericalMap load_sphmap(const std::string& path, SphereGrid& grid_storage);

}  // namespace surfgen
