#include "surfgen/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "surfgen/errors.hpp"

namespace surfgen {

void validate_mesh(const TriangleMesh& mesh) {
    const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
    for (const auto& f : mesh.faces) {
        if (f[0] >= n || f[1] >= n || f[2] >= n)
            throw Error("face index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw Error("degenerate face with repeated vertex index");
    }
}

namespace {

std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_counts(const TriangleMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            std::uint32_t a = f[e], b = f[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edges[{a, b}];
        }
    }
    return edges;
}

}  // namespace

long euler_characteristic(const TriangleMesh& mesh) {
    if (mesh.empty()) return 0;
    auto edges = edge_counts(mesh);
    return static_cast<long>(mesh.vertices.size()) - static_cast<long>(edges.size()) +
           static_cast<long>(mesh.faces.size());
}

bool is_watertight(const TriangleMesh& mesh) {
    if (mesh.empty()) return false;
    for (const auto& [edge, count] : edge_counts(mesh))
        if (count != 2) return false;
    return true;
}

TriangleMesh normalize_to_unit_sphere(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) throw EmptyMeshError();
    Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
        lo = min3(lo, v);
        hi = max3(hi, v);
    }
    const Vec3 center = (lo + hi) * 0.5;
    double max_norm = 0.0;
    for (const auto& v : mesh.vertices) max_norm = std::max(max_norm, norm(v - center));
    const double scale = max_norm > 0.0 ? 1.0 / max_norm : 1.0;

    TriangleMesh out;
    out.faces = mesh.faces;
    out.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.vertices.push_back((v - center) * scale);
    return out;
}

TriangleMesh translate(const TriangleMesh& mesh, const Vec3& offset) {
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v += offset;
    return out;
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ file: " + path);
    TriangleMesh mesh;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 v;
            ls >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<std::uint32_t, 3> f{};
            for (int i = 0; i < 3; ++i) {
                std::string tok;
                ls >> tok;
                // tolerate v/vt/vn references, keep the vertex index only
                f[i] = static_cast<std::uint32_t>(std::stoul(tok.substr(0, tok.find('/')))) - 1;
            }
            mesh.faces.push_back(f);
        }
    }
    validate_mesh(mesh);
    return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write OBJ file: " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace surfgen
