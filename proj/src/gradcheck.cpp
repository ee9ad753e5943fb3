#include "surfgen/gradcheck.hpp"

#include <cmath>
#include <random>

#include "surfgen/bvh.hpp"

namespace surfgen {

namespace {

// pixels whose recorded hits are within `margin` of a boundary of the
// piecewise-smooth replay: near-miss closest points at a clamp corner, or
// direct hits grazing a triangle edge
std::vector<std::uint8_t> smooth_pixels(const ProjectionTape& tape, const TriangleMesh& mesh,
                                        double margin) {
    std::vector<std::uint8_t> smooth(tape.n_pixels, 1);
    for (const auto& h : tape.sil_hits) {
        if (h.direct) continue;
        const auto tri = mesh.triangle(h.face);
        const ClosestPoint cp = nearest_on_triangle(h.ray_point, tri[0], tri[1], tri[2]);
        for (int q = 0; q < 3; ++q) {
            const double w = cp.bary[q];
            if (std::abs(w) < margin || std::abs(w - 1.0) < margin) smooth[h.pixel] = 0;
        }
    }
    for (const auto& h : tape.depth_hits) {
        const auto tri = mesh.triangle(h.face);
        // area-ratio weights kink at 0 where the |cross| terms vanish
        const double a2 = norm(cross(tri[1] - tri[0], tri[2] - tri[0]));
        const double w0 = norm(cross(tri[2] - tri[1], h.point - tri[1])) / a2;
        const double w1 = norm(cross(tri[0] - tri[2], h.point - tri[2])) / a2;
        for (double w : {w0, w1, 1.0 - w0 - w1})
            if (std::abs(w) < margin) smooth[h.pixel] = 0;
    }
    return smooth;
}

}  // namespace

GradCheckReport gradient_check(const TriangleMesh& mesh, const SphereGrid& grid,
                               const ProjectionConfig& config, int n_directions,
                               std::uint64_t seed, double fd_step) {
    GradCheckReport report;
    report.n_directions = n_directions;
    for (const auto& f : mesh.faces) {
        const auto t = mesh.triangle(&f - mesh.faces.data());
        if (norm(cross(t[1] - t[0], t[2] - t[0])) * 0.5 < 1e-14) ++report.skipped_faces;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (RayMode mode : {RayMode::Radial, RayMode::Orthographic}) {
        const RaySet rays = make_rays(grid, mode, config.eps_equator);
        auto [map, tape] = project_forward(mesh, rays, config);
        const auto smooth = smooth_pixels(tape, mesh, 1e-6);
        for (std::size_t i = 0; i < smooth.size(); ++i)
            if (!smooth[i]) ++report.excluded_pixels;

        for (int d = 0; d < n_directions; ++d) {
            MapGrads adjoint;
            adjoint.depth.resize(tape.n_pixels);
            adjoint.sil.resize(tape.n_pixels);
            for (std::size_t i = 0; i < tape.n_pixels; ++i) {
                adjoint.depth[i] = smooth[i] ? gauss(rng) : 0.0;
                adjoint.sil[i] = smooth[i] ? gauss(rng) : 0.0;
            }
            std::vector<Vec3> dv(mesh.vertices.size());
            double dv_norm2 = 0.0;
            for (auto& v : dv) {
                v = {gauss(rng), gauss(rng), gauss(rng)};
                dv_norm2 += norm2(v);
            }
            const double inv = 1.0 / std::sqrt(dv_norm2);
            for (auto& v : dv) v *= inv;

            auto perturbed = [&](double h) {
                TriangleMesh m = mesh;
                for (std::size_t i = 0; i < m.vertices.size(); ++i) m.vertices[i] += dv[i] * h;
                std::vector<double> depth, sil;
                replay_tape(tape, m, depth, sil);
                return std::pair{depth, sil};
            };
            const auto [dp, sp] = perturbed(fd_step);
            const auto [dm, sm] = perturbed(-fd_step);

            double fd_depth = 0.0, fd_sil = 0.0;
            for (std::size_t i = 0; i < tape.n_pixels; ++i) {
                fd_depth += adjoint.depth[i] * (dp[i] - dm[i]) / (2.0 * fd_step);
                fd_sil += adjoint.sil[i] * (sp[i] - sm[i]) / (2.0 * fd_step);
            }

            double vjp_depth = 0.0, vjp_sil = 0.0;
            {
                MapGrads only;
                only.depth = adjoint.depth;
                const auto g = project_backward(tape, mesh, only);
                for (std::size_t i = 0; i < g.size(); ++i) vjp_depth += dot(g[i], dv[i]);
            }
            {
                MapGrads only;
                only.sil = adjoint.sil;
                const auto g = project_backward(tape, mesh, only);
                for (std::size_t i = 0; i < g.size(); ++i) vjp_sil += dot(g[i], dv[i]);
            }

            auto rel = [](double a, double b) {
                const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
                return std::abs(a - b) / scale;
            };
            report.max_rel_err_depth = std::max(report.max_rel_err_depth, rel(vjp_depth, fd_depth));
            report.max_rel_err_sil = std::max(report.max_rel_err_sil, rel(vjp_sil, fd_sil));
        }
    }
    return report;
}

}  // namespace surfgen
