#include "surfgen/marching_cubes.hpp"

#include <cstdint>
#include <unordered_map>

#include "marching_cubes_tables.hpp"

namespace surfgen {

namespace {

// Cube corner offsets, Bourke layout: 0-3 bottom ring, 4-7 top ring.
constexpr int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

// Cube edge -> (corner a, corner b).
constexpr int kEdge[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

// Cube edge -> global grid edge: axis (0=x,1=y,2=z) and lower-node offset.
constexpr int kEdgeGlobal[12][4] = {
    {0, 0, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 0},
    {0, 0, 0, 1}, {1, 1, 0, 1}, {0, 0, 1, 1}, {1, 0, 0, 1},
    {2, 0, 0, 0}, {2, 1, 0, 0}, {2, 1, 1, 0}, {2, 0, 1, 0},
};

}  // namespace

TriangleMesh marching_cubes(const SdfGrid& grid, double iso) {
    const int res = grid.resolution();
    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

    // value relative to iso; exact ties nudged negative to avoid
    // degenerate zero-length edge crossings
    auto rel = [&](int i, int j, int k) {
        double v = grid.at(i, j, k) - iso;
        return v == 0.0 ? -1e-10 : v;
    };

    auto edge_key = [&](int axis, int i, int j, int k) {
        return ((static_cast<std::uint64_t>(axis) * res + k) * res + j) * res + i;
    };

    for (int k = 0; k < res - 1; ++k) {
        for (int j = 0; j < res - 1; ++j) {
            for (int i = 0; i < res - 1; ++i) {
                double v[8];
                int cube_index = 0;
                for (int c = 0; c < 8; ++c) {
                    v[c] = rel(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
                    if (v[c] < 0.0) cube_index |= 1 << c;
                }
                if (mc::kEdgeTable[cube_index] == 0) continue;

                std::uint32_t edge_index[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(mc::kEdgeTable[cube_index] & (1 << e))) continue;
                    const auto key = edge_key(kEdgeGlobal[e][0], i + kEdgeGlobal[e][1],
                                              j + kEdgeGlobal[e][2], k + kEdgeGlobal[e][3]);
                    auto it = edge_vertex.find(key);
                    if (it != edge_vertex.end()) {
                        edge_index[e] = it->second;
                        continue;
                    }
                    const int a = kEdge[e][0], b = kEdge[e][1];
                    const double t = v[a] / (v[a] - v[b]);
                    const Vec3 pa = grid.node_position(i + kCorner[a][0], j + kCorner[a][1],
                                                       k + kCorner[a][2]);
                    const Vec3 pb = grid.node_position(i + kCorner[b][0], j + kCorner[b][1],
                                                       k + kCorner[b][2]);
                    const auto idx = static_cast<std::uint32_t>(mesh.vertices.size());
                    mesh.vertices.push_back(pa + (pb - pa) * t);
                    edge_vertex.emplace(key, idx);
                    edge_index[e] = idx;
                }

                const int* tri = mc::kTriTable[cube_index];
                for (int t = 0; tri[t] != -1; t += 3) {
                    // table order is flipped for this corner layout; swap to
                    // get outward normals on negative-inside fields
                    std::array<std::uint32_t, 3> f = {edge_index[tri[t]], edge_index[tri[t + 2]],
                                                      edge_index[tri[t + 1]]};
                    // welding can collapse a sliver to a repeated vertex
                    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
                    mesh.faces.push_back(f);
                }
            }
        }
    }
    return mesh;
}

}  // namespace surfgen
