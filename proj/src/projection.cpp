#include "surfgen/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <omp.h>

#include <nlohmann/json.hpp>

#include "surfgen/errors.hpp"

namespace surfgen {

const ChannelData* SphericalMap::find(const std::string& name) const {
    for (const auto& c : channels)
        if (c.name == name) return &c;
    return nullptr;
}

ChannelData* SphericalMap::find(const std::string& name) {
    for (auto& c : channels)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

// Area-ratio barycentric weights of p w.r.t. the triangle (Supp.-B form,
// differentiable in the vertices at fixed p).
Vec3 area_bary(const Vec3& p, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    const double a2 = norm(cross(v1 - v0, v2 - v0));
    if (a2 < 1e-30) return {1, 0, 0};
    const double w0 = norm(cross(v2 - v1, p - v1)) / a2;
    const double w1 = norm(cross(v0 - v2, p - v2)) / a2;
    return {w0, w1, 1.0 - w0 - w1};
}

// d/da and d/db of ||(b - a) x (p - a)|| at fixed p.
void cross_norm_grads(const Vec3& a, const Vec3& b, const Vec3& p, Vec3& grad_a, Vec3& grad_b) {
    const Vec3 c = cross(b - a, p - a);
    const double n = norm(c);
    if (n < 1e-30) {
        grad_a = grad_b = {0, 0, 0};
        return;
    }
    const Vec3 ch = c / n;
    grad_a = cross(ch, p - a) + cross(b - a, ch);
    grad_b = cross(p - a, ch);
}

// Accumulates gbar * d(depth)/dv_q for depth = ||sum_q w_q v_q - origin||.
void accum_depth_grad(const Vec3& p, const Vec3& origin, const Vec3& v0, const Vec3& v1,
                      const Vec3& v2, double gbar, Vec3* out) {
    const Vec3 e1 = v1 - v0, e2 = v2 - v0;
    const Vec3 n = cross(e1, e2);
    const double a2 = norm(n);
    if (a2 < 1e-30) return;
    const Vec3 nh = n / a2;

    const Vec3 w = area_bary(p, v0, v1, v2);
    const Vec3 u = v0 * w.x + v1 * w.y + v2 * w.z;
    const double depth = norm(u - origin);
    if (depth < 1e-12) return;
    const Vec3 rhat = (u - origin) / depth;

    const Vec3 ga2_v1 = cross(e2, nh);
    const Vec3 ga2_v2 = cross(nh, e1);
    const Vec3 ga2_v0 = -ga2_v1 - ga2_v2;

    Vec3 gc0_v1, gc0_v2;  // ||C0||, C0 = (v2 - v1) x (p - v1)
    cross_norm_grads(v1, v2, p, gc0_v1, gc0_v2);
    Vec3 gc1_v2, gc1_v0;  // ||C1||, C1 = (v0 - v2) x (p - v2)
    cross_norm_grads(v2, v0, p, gc1_v2, gc1_v0);

    const Vec3 gw0[3] = {(-w.x / a2) * ga2_v0, gc0_v1 / a2 - (w.x / a2) * ga2_v1,
                         gc0_v2 / a2 - (w.x / a2) * ga2_v2};
    const Vec3 gw1[3] = {gc1_v0 / a2 - (w.y / a2) * ga2_v0, (-w.y / a2) * ga2_v1,
                         gc1_v2 / a2 - (w.y / a2) * ga2_v2};

    const double ru0 = dot(rhat, v0), ru1 = dot(rhat, v1), ru2 = dot(rhat, v2);
    const double ws[3] = {w.x, w.y, w.z};
    for (int q = 0; q < 3; ++q) {
        const Vec3 gw2 = -gw0[q] - gw1[q];
        Vec3 g = rhat * ws[q];
        g += gw0[q] * ru0 + gw1[q] * ru1 + gw2 * ru2;
        out[q] += g * gbar;
    }
}

const char* depth_name(RayMode mode) {
    return mode == RayMode::Radial ? "radial_depth" : "ortho_depth";
}
const char* sil_name(RayMode mode) {
    return mode == RayMode::Radial ? "radial_sil" : "ortho_sil";
}

}  // namespace

void replay_tape(const ProjectionTape& tape, const TriangleMesh& mesh,
                 std::vector<double>& depth, std::vector<double>& sil) {
    if (tape.n_vertices != mesh.vertices.size())
        throw ShapeMismatchError("tape was recorded for a different mesh");
    depth.assign(tape.n_pixels, tape.background);
    sil.assign(tape.n_pixels, 0.0);

    for (const auto& h : tape.depth_hits) {
        const auto tri = mesh.triangle(h.face);
        const Vec3 w = area_bary(h.point, tri[0], tri[1], tri[2]);
        const Vec3 u = tri[0] * w.x + tri[1] * w.y + tri[2] * w.z;
        depth[h.pixel] = norm(u - tape.ray_origins[h.pixel]);
    }

    for (std::size_t i = 0; i < tape.n_pixels; ++i) {
        double prod = 1.0;
        bool any = false;
        for (std::uint32_t s = tape.sil_offsets[i]; s < tape.sil_offsets[i + 1]; ++s) {
            const auto& h = tape.sil_hits[s];
            any = true;
            if (h.direct) {
                prod = 0.0;
            } else {
                const auto tri = mesh.triangle(h.face);
                const ClosestPoint cp = nearest_on_triangle(h.ray_point, tri[0], tri[1], tri[2]);
                prod *= 1.0 - std::exp(-cp.sq_dist / tape.delta);
            }
        }
        if (any) sil[i] = 1.0 - prod;
    }
}

std::pair<SphericalMap, ProjectionTape> project_forward(const TriangleMesh& mesh,
                                                        const RaySet& rays,
                                                        const ProjectionConfig& config) {
    validate_mesh(mesh);
    const std::size_t n = rays.size();
    const Bvh bvh(mesh);

    ProjectionTape tape;
    tape.mode = rays.mode;
    tape.n_pixels = n;
    tape.n_vertices = mesh.vertices.size();
    tape.delta = config.delta;
    tape.background = config.background;
    tape.ray_origins = rays.origins;
    tape.valid = rays.valid;

    std::vector<std::optional<ProjectionTape::DepthHit>> depth_slots(n);
    std::vector<std::vector<ProjectionTape::SilHit>> sil_slots(n);

    const int nt = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(nt)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        if (!rays.valid[i]) continue;
        const Ray ray{rays.origins[i], rays.directions[i]};
        const auto hits = bvh.ray_intersect_k(ray, config.k, config.r);
        const auto pix = static_cast<std::uint32_t>(i);
        for (const auto& h : hits) {
            if (h.kind == HitKind::Direct) {
                if (!depth_slots[i])  // hits are t-sorted: first direct is nearest
                    depth_slots[i] = ProjectionTape::DepthHit{pix, h.face, h.point};
                sil_slots[i].push_back({pix, h.face, h.point, 1});
            } else {
                sil_slots[i].push_back({pix, h.face, h.point, 0});
            }
        }
    }

    tape.sil_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (depth_slots[i]) tape.depth_hits.push_back(*depth_slots[i]);
        tape.sil_offsets[i + 1] =
            tape.sil_offsets[i] + static_cast<std::uint32_t>(sil_slots[i].size());
        for (const auto& s : sil_slots[i]) tape.sil_hits.push_back(s);
    }

    std::vector<double> depth, sil;
    replay_tape(tape, mesh, depth, sil);

    SphericalMap map;
    map.grid = rays.grid;
    map.background_depth = config.background;
    map.channels.push_back({depth_name(rays.mode), std::move(depth), rays.valid});
    map.channels.push_back({sil_name(rays.mode), std::move(sil), rays.valid});
    return {std::move(map), std::move(tape)};
}

std::vector<Vec3> project_backward(const ProjectionTape& tape, const TriangleMesh& mesh,
                                   const MapGrads& map_grads, int threads) {
    if (tape.n_vertices != mesh.vertices.size())
        throw ShapeMismatchError("tape/mesh vertex count mismatch");
    if (!map_grads.depth.empty() && map_grads.depth.size() != tape.n_pixels)
        throw ShapeMismatchError("depth adjoint size mismatch");
    if (!map_grads.sil.empty() && map_grads.sil.size() != tape.n_pixels)
        throw ShapeMismatchError("silhouette adjoint size mismatch");

    std::vector<Vec3> grads(tape.n_vertices);

    if (!map_grads.depth.empty()) {
        for (const auto& h : tape.depth_hits) {
            const double g = map_grads.depth[h.pixel];
            if (g == 0.0) continue;
            const auto& f = mesh.faces[h.face];
            Vec3 tri_grads[3];
            accum_depth_grad(h.point, tape.ray_origins[h.pixel], mesh.vertices[f[0]],
                             mesh.vertices[f[1]], mesh.vertices[f[2]], g, tri_grads);
            for (int q = 0; q < 3; ++q) grads[f[q]] += tri_grads[q];
        }
    }

    if (!map_grads.sil.empty()) {
        const int nt = threads > 0 ? threads : 1;
#pragma omp parallel num_threads(nt)
        {
            std::vector<Vec3> local(tape.n_vertices);
#pragma omp for schedule(dynamic, 64)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(tape.n_pixels); ++i) {
                const double g = map_grads.sil[i];
                if (g == 0.0) continue;
                const std::uint32_t lo = tape.sil_offsets[i], hi = tape.sil_offsets[i + 1];
                if (lo == hi) continue;

                // alpha = 1 - prod_j (1 - alpha_j); a direct hit zeroes the
                // product and kills every near-miss partial
                int zero_factors = 0;
                double prod_nonzero = 1.0;
                std::vector<double> alphas(hi - lo);
                for (std::uint32_t s = lo; s < hi; ++s) {
                    const auto& h = tape.sil_hits[s];
                    double a;
                    if (h.direct) {
                        a = 1.0;
                    } else {
                        const auto tri = mesh.triangle(h.face);
                        const ClosestPoint cp =
                            nearest_on_triangle(h.ray_point, tri[0], tri[1], tri[2]);
                        a = std::exp(-cp.sq_dist / tape.delta);
                    }
                    alphas[s - lo] = a;
                    const double f = 1.0 - a;
                    if (f == 0.0)
                        ++zero_factors;
                    else
                        prod_nonzero *= f;
                }

                for (std::uint32_t s = lo; s < hi; ++s) {
                    const auto& h = tape.sil_hits[s];
                    if (h.direct) continue;  // alpha_j = 1 is locally constant
                    const double a = alphas[s - lo];
                    const double factor = 1.0 - a;
                    double dsil_da;  // d(alpha)/d(alpha_j) = prod of other factors
                    if (zero_factors > 0)
                        dsil_da = 0.0;
                    else
                        dsil_da = prod_nonzero / factor;
                    if (dsil_da == 0.0) continue;

                    const auto tri = mesh.triangle(h.face);
                    const ClosestPoint cp =
                        nearest_on_triangle(h.ray_point, tri[0], tri[1], tri[2]);
                    // d(sq_dist)/dv_q = 2 w_q (c - p') at the optimal weights
                    const double coeff = g * dsil_da * (-a / tape.delta) * 2.0;
                    const Vec3 diff = cp.point - h.ray_point;
                    const auto& f = mesh.faces[h.face];
                    const double ws[3] = {cp.bary.x, cp.bary.y, cp.bary.z};
                    for (int q = 0; q < 3; ++q) local[f[q]] += diff * (coeff * ws[q]);
                }
            }
#pragma omp critical
            for (std::size_t v = 0; v < grads.size(); ++v) grads[v] += local[v];
        }
    }
    return grads;
}

std::vector<double> mask_depth_gradient(const std::vector<double>& depth_grads,
                                        const std::vector<double>& target_occupancy) {
    if (depth_grads.size() != target_occupancy.size())
        throw ShapeMismatchError("mask/gradient size mismatch");
    std::vector<double> out(depth_grads.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = target_occupancy[i] >= 1.0 ? depth_grads[i] : 0.0;
    return out;
}

FullProjection full_projection_with_tape(const TriangleMesh& mesh, const SphereGrid& grid,
                                         const ProjectionConfig& config) {
    const RaySet radial = make_rays(grid, RayMode::Radial, config.eps_equator);
    const RaySet ortho = make_rays(grid, RayMode::Orthographic, config.eps_equator);
    auto [rmap, rtape] = project_forward(mesh, radial, config);
    auto [omap, otape] = project_forward(mesh, ortho, config);

    FullProjection out;
    out.map.grid = &grid;
    out.map.background_depth = config.background;
    out.map.channels.push_back(std::move(*rmap.find("radial_depth")));
    out.map.channels.push_back(std::move(*omap.find("ortho_depth")));
    out.map.channels.push_back(std::move(*omap.find("ortho_sil")));
    if (config.all_channels) out.map.channels.push_back(std::move(*rmap.find("radial_sil")));
    out.radial_tape = std::move(rtape);
    out.ortho_tape = std::move(otape);
    return out;
}

SphericalMap full_projection(const TriangleMesh& mesh, const SphereGrid& grid,
                             const ProjectionConfig& config) {
    return full_projection_with_tape(mesh, grid, config).map;
}

void save_sphmap(const SphericalMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write sphmap: " + path);
    nlohmann::json header;
    header["schema"] = "sphmap-v1";
    header["scheme"] = to_string(map.grid->scheme);
    if (map.grid->scheme == SphereScheme::Healpix) {
        header["nside"] = map.grid->nside;
        header["ordering"] = "RING";
    } else {
        header["n_theta"] = map.grid->n_theta;
        header["n_phi"] = map.grid->n_phi;
        header["ordering"] = "row-major";
    }
    auto names = nlohmann::json::array();
    for (const auto& c : map.channels) names.push_back(c.name);
    header["channels"] = names;
    header["background"] = map.background_depth;
    out << header.dump() << "\n";
    for (const auto& c : map.channels) {
        std::vector<float> raw(c.values.begin(), c.values.end());
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed: " + path);
}

SphericalMap load_sphmap(const std::string& path, SphereGrid& grid_storage) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sphmap: " + path);
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    if (header.at("schema") != "sphmap-v1") throw IoError("bad sphmap schema");
    if (header.at("scheme") == "healpix")
        grid_storage = healpix_grid(header.at("nside").get<int>());
    else
        grid_storage = equirect_grid(header.at("n_theta").get<int>(),
                                     header.at("n_phi").get<int>());
    SphericalMap map;
    map.grid = &grid_storage;
    map.background_depth = header.at("background").get<double>();

    const RaySet ortho = make_rays(grid_storage, RayMode::Orthographic);
    const std::size_t n = grid_storage.pixel_count();
    for (const auto& name : header.at("channels")) {
        std::vector<float> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw IoError("truncated sphmap: " + path);
        ChannelData c;
        c.name = name.get<std::string>();
        c.values.assign(raw.begin(), raw.end());
        c.valid = c.name.rfind("ortho", 0) == 0 ? ortho.valid
                                                : std::vector<std::uint8_t>(n, 1);
        map.channels.push_back(std::move(c));
    }
    return map;
}

}  // namespace surfgen
