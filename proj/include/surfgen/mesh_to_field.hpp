#pragma once

#include <span>
#include <vector>

#include "surfgen/mesh.hpp"
#include "surfgen/sdf_grid.hpp"

namespace surfgen {

struct RoutingResult {
    std::vector<double> field_grads;  // per-grid-value adjoints, x-fastest
    std::size_t degenerate_normals = 0;  // vertices skipped for |grad| < 1e-12
};

/// Turns per-vertex loss gradients into per-grid-value adjoints: for each
/// vertex the scalar adjoint -(dL/dv . n(v)) * omega is scattered into the
/// 8 enclosing grid values with trilinear weights, where n(v) is the
/// normalized field gradient at v. Vertices with vanishing field gradient
/// contribute nothing and are tallied.
RoutingResult route_surface_gradient(const TriangleMesh& mesh, const SdfGrid& grid,
                                     std::span<const Vec3> vertex_grads, double omega = 1e-4);

}  // namespace surfgen
