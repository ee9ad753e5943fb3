#include "surfgen/mesh_to_field.hpp"

#include <algorithm>

#include "surfgen/errors.hpp"

namespace surfgen {

RoutingResult route_surface_gradient(const TriangleMesh& mesh, const SdfGrid& grid,
                                     std::span<const Vec3> vertex_grads, double omega) {
    if (vertex_grads.size() != mesh.vertices.size())
        throw ShapeMismatchError("vertex_grads length must equal vertex count");

    const int res = grid.resolution();
    const double h = grid.spacing();
    RoutingResult out;
    out.field_grads.assign(grid.size(), 0.0);

    for (std::size_t vi = 0; vi < mesh.vertices.size(); ++vi) {
        const Vec3& v = mesh.vertices[vi];
        const FieldSample fs = grid.sample(v);
        const double gn = norm(fs.gradient);
        if (gn < 1e-12) {
            ++out.degenerate_normals;
            continue;
        }
        const Vec3 n = fs.gradient / gn;
        const double adjoint = -dot(vertex_grads[vi], n) * omega;
        if (adjoint == 0.0) continue;

        auto locate = [&](double c) {
            double u = (c + 1.0) / h;
            int i = std::clamp(static_cast<int>(u), 0, res - 2);
            return std::pair{i, std::clamp(u - i, 0.0, 1.0)};
        };
        auto [i, fx] = locate(v.x);
        auto [j, fy] = locate(v.y);
        auto [k, fz] = locate(v.z);
        const double wx[2] = {1.0 - fx, fx};
        const double wy[2] = {1.0 - fy, fy};
        const double wz[2] = {1.0 - fz, fz};
        for (int dk = 0; dk < 2; ++dk)
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di)
                    out.field_grads[grid.index(i + di, j + dj, k + dk)] +=
                        adjoint * wx[di] * wy[dj] * wz[dk];
    }
    return out;
}

}  // namespace surfgen
