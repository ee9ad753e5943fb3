#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surfgen/vec3.hpp"

namespace surfgen {

/// Indexed triangle surface. Faces use right-hand-rule winding; for meshes
/// extracted from a negative-inside field, face normals point outward.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;

    bool empty() const { return vertices.empty() || faces.empty(); }

    Vec3 vertex(std::uint32_t i) const { return vertices[i]; }
    std::array<Vec3, 3> triangle(std::size_t f) const {
        const auto& t = faces[f];
        return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
    }
};

/// Checks index bounds and rejects degenerate (repeated-index) faces.
void validate_mesh(const TriangleMesh& mesh);

/// V - E + F over the unique undirected edge set.
long euler_characteristic(const TriangleMesh& mesh);

/// True when every undirected edge is shared by exactly two faces.
bool is_watertight(const TriangleMesh& mesh);

/// Centers the vertex bounding box at the origin and scales so the
/// farthest vertex has norm 1. Idempotent.
TriangleMesh normalize_to_unit_sphere(const TriangleMesh& mesh);

TriangleMesh translate(const TriangleMesh& mesh, const Vec3& offset);

// Wavefront OBJ, vertices and faces only, 1-based indices.
TriangleMesh load_obj(const std::string& path);
void save_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace surfgen
