#pragma once

#include <cstdint>
#include <vector>

#include "surfgen/mesh.hpp"
#include "surfgen/vec3.hpp"

namespace surfgen {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit length
};

enum class HitKind { Direct, NearMiss };

/// One ray-triangle event. Direct hits record the intersection point and
/// barycentric weights; near misses record the closest ray point, the
/// closest triangle point with its barycentric weights, and the squared
/// ray-triangle distance.
struct Hit {
    std::uint32_t face = 0;
    HitKind kind = HitKind::Direct;
    Vec3 point;        // intersection (Direct) or closest point on the ray (NearMiss)
    double t = 0.0;    // ray parameter of `point`, >= 0
    Vec3 bary;         // Direct: barycentric weights of `point`
    double sq_dist = 0.0;  // NearMiss: squared distance ray-triangle, in (0, r^2]
    Vec3 tri_point;    // NearMiss: closest point on the triangle
    Vec3 tri_bary;     // NearMiss: barycentric weights of tri_point
};

struct ClosestPoint {
    Vec3 point;
    double sq_dist = 0.0;
    Vec3 bary;
};

/// Closest point on a triangle to p, with barycentric weights of the
/// result. Throws on triangles with area < 1e-14.
ClosestPoint nearest_on_triangle(const Vec3& p, const Vec3& v0, const Vec3& v1, const Vec3& v2);

/// Static axis-aligned BVH over mesh faces, median split, leaf size <= 4.
/// Read-only after construction; queries are pure.
class Bvh {
  public:
    explicit Bvh(const TriangleMesh& mesh);

    const TriangleMesh& mesh() const { return *mesh_; }

    /// The k nearest hits along the ray, sorted ascending by t: direct
    /// intersections plus near misses within distance r. One hit per face,
    /// direct preferred.
    std::vector<Hit> ray_intersect_k(const Ray& ray, int k, double r) const;

    /// Closest point on the surface to p (any face).
    ClosestPoint closest_point(const Vec3& p) const;
    std::uint32_t closest_face(const Vec3& p) const;

    /// True when the open segment (a, b) has a direct intersection.
    bool segment_occluded(const Vec3& a, const Vec3& b) const;

  private:
    struct Node {
        Vec3 lo, hi;
        // leaf: first slot in face_order_; inner: right child index
        // (the left child is always the next node)
        std::uint32_t left = 0;
        std::uint32_t count = 0;  // face count when leaf, 0 for inner nodes
        bool leaf() const { return count > 0; }
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end,
                        std::vector<Vec3>& centroids);
    std::uint32_t closest_face_impl(const Vec3& p, ClosestPoint& best) const;

    const TriangleMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> face_order_;
};

/// Serial all-triangle reference with identical semantics to
/// Bvh::ray_intersect_k; kept as the oracle for BVH correctness tests and
/// the benchmark baseline.
std::vector<Hit> ray_intersect_k_brute(const TriangleMesh& mesh, const Ray& ray, int k, double r);

/// Single-triangle test shared by both paths; returns true when a hit
/// (direct or near-miss within r) exists.
bool intersect_triangle(const Ray& ray, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                        double r, Hit& hit);

}  // namespace surfgen
