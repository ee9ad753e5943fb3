#include "surfgen/sphere_grid.hpp"

#include <cmath>
#include <numbers>

#include "surfgen/errors.hpp"

namespace surfgen {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 from_z_phi(double z, double phi) {
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

}  // namespace

SphereGrid healpix_grid(int nside) {
    if (nside < 1 || (nside & (nside - 1)) != 0)
        throw ConfigError("HEALPix nside must be a power of two");

    SphereGrid grid;
    grid.scheme = SphereScheme::Healpix;
    grid.nside = nside;
    grid.directions.reserve(static_cast<std::size_t>(12) * nside * nside);

    // RING ordering: walk the 4*nside-1 iso-latitude rings north to south,
    // pixels in increasing phi within each ring.
    for (int ring = 1; ring <= 4 * nside - 1; ++ring) {
        if (ring < nside) {  // north polar cap
            const double z = 1.0 - static_cast<double>(ring) * ring / (3.0 * nside * nside);
            for (int j = 1; j <= 4 * ring; ++j)
                grid.directions.push_back(from_z_phi(z, kPi / (2.0 * ring) * (j - 0.5)));
        } else if (ring <= 3 * nside) {  // equatorial belt
            const double z = 4.0 / 3.0 - 2.0 * ring / (3.0 * nside);
            const int s = (ring - nside + 1) % 2;  // ring phase offset
            for (int j = 1; j <= 4 * nside; ++j)
                grid.directions.push_back(from_z_phi(z, kPi / (2.0 * nside) * (j - 0.5 * s)));
        } else {  // south polar cap
            const int r = 4 * nside - ring;
            const double z = -1.0 + static_cast<double>(r) * r / (3.0 * nside * nside);
            for (int j = 1; j <= 4 * r; ++j)
                grid.directions.push_back(from_z_phi(z, kPi / (2.0 * r) * (j - 0.5)));
        }
    }
    return grid;
}

SphereGrid equirect_grid(int n_theta, int n_phi) {
    if (n_theta < 1 || n_phi < 1) throw ConfigError("equirect grid dimensions must be >= 1");
    SphereGrid grid;
    grid.scheme = SphereScheme::Equirect;
    grid.n_theta = n_theta;
    grid.n_phi = n_phi;
    grid.directions.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_phi; ++i) {
        const double phi = kPi * (i + 0.5) / n_phi;  // colatitude
        for (int j = 0; j < n_theta; ++j) {
            const double theta = 2.0 * kPi * (j + 0.5) / n_theta;
            grid.directions.push_back(
                {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)});
        }
    }
    return grid;
}

RaySet make_rays(const SphereGrid& grid, RayMode mode, double eps_equator) {
    RaySet rays;
    rays.grid = &grid;
    rays.mode = mode;
    const std::size_t n = grid.pixel_count();
    rays.origins.reserve(n);
    rays.directions.reserve(n);
    rays.valid.reserve(n);
    for (const auto& dir : grid.directions) {
        rays.origins.push_back(dir);
        if (mode == RayMode::Radial) {
            rays.directions.push_back(-normalized(dir));
            rays.valid.push_back(1);
        } else {
            if (std::abs(dir.z) < eps_equator) {
                rays.directions.push_back({0, 0, 0});
                rays.valid.push_back(0);
            } else {
                rays.directions.push_back({0, 0, dir.z > 0 ? -1.0 : 1.0});
                rays.valid.push_back(1);
            }
        }
    }
    return rays;
}

const char* to_string(RayMode mode) {
    return mode == RayMode::Radial ? "radial" : "orthographic";
}

const char* to_string(SphereScheme scheme) {
    return scheme == SphereScheme::Healpix ? "healpix" : "equirect";
}

}  // namespace surfgen
