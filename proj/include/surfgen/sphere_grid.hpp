#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfgen/vec3.hpp"

namespace surfgen {

enum class SphereScheme { Healpix, Equirect };

/// Discrete samples of the unit sphere. HEALPix uses RING ordering
/// (12 * nside^2 pixels); equirect is row-major over (theta, phi) cell
/// centers.
struct SphereGrid {
    SphereScheme scheme = SphereScheme::Healpix;
    int nside = 0;           // HEALPix only
    int n_theta = 0, n_phi = 0;  // Equirect only
    std::vector<Vec3> directions;

    std::size_t pixel_count() const { return directions.size(); }
    bool operator==(const SphereGrid& o) const {
        return scheme == o.scheme && nside == o.nside && n_theta == o.n_theta && n_phi == o.n_phi;
    }
};

/// HEALPix pixel centers in RING ordering. nside must be a power of two.
SphereGrid healpix_grid(int nside);

/// Equirectangular cell centers: theta in [0,2pi), phi in [0,pi].
SphereGrid equirect_grid(int n_theta, int n_phi);

enum class RayMode { Radial, Orthographic };

/// One ray per sphere pixel. Radial: origin on the sphere, direction
/// toward the center. Orthographic: direction (0,0,-sign(O_z)) along the
/// gravity axis; near-equatorial pixels are masked invalid.
struct RaySet {
    const SphereGrid* grid = nullptr;
    RayMode mode = RayMode::Radial;
    std::vector<Vec3> origins;
    std::vector<Vec3> directions;
    std::vector<std::uint8_t> valid;

    std::size_t size() const { return origins.size(); }
};

RaySet make_rays(const SphereGrid& grid, RayMode mode, double eps_equator = 1e-9);

const char* to_string(RayMode mode);
const char* to_string(SphereScheme scheme);

}  // namespace surfgen
