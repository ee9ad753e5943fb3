#pragma once

#include "surfgen/mesh.hpp"
#include "surfgen/sdf_grid.hpp"

namespace surfgen {

/// Extracts the (value - iso) zero level set as a triangle mesh with
/// welded vertices on grid edges. Returns an empty mesh when the field
/// has no sign change. Faces wind outward for negative-inside fields.
TriangleMesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

}  // namespace surfgen
