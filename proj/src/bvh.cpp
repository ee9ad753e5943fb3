#include "surfgen/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "surfgen/errors.hpp"

namespace surfgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDetEps = 1e-12;
constexpr std::uint32_t kLeafSize = 4;

// Closest points between the ray o + s*d (s >= 0, |d| = 1) and the
// segment a + u*(b - a) (u in [0, 1]). Returns (s, u).
std::pair<double, double> ray_segment_closest(const Ray& ray, const Vec3& a, const Vec3& b) {
    const Vec3 e = b - a;
    const Vec3 w = ray.origin - a;
    const double B = dot(ray.dir, e);
    const double C = dot(e, e);
    const double D = dot(ray.dir, w);
    const double E = dot(e, w);
    const double denom = C - B * B;  // A = 1

    double u = denom > 1e-30 ? (E - B * D) / denom : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    double s = std::max(0.0, B * u - D);
    if (C > 1e-30) u = std::clamp((E + s * B) / C, 0.0, 1.0);
    s = std::max(0.0, B * u - D);
    return {s, u};
}

bool slab_hit(const Ray& ray, const Vec3& lo, const Vec3& hi, double inflate,
              double& t_enter) {
    double tmin = 0.0, tmax = kInf;
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin[a], d = ray.dir[a];
        const double l = lo[a] - inflate, h = hi[a] + inflate;
        if (std::abs(d) < 1e-30) {
            if (o < l || o > h) return false;
        } else {
            double t0 = (l - o) / d, t1 = (h - o) / d;
            if (t0 > t1) std::swap(t0, t1);
            tmin = std::max(tmin, t0);
            tmax = std::min(tmax, t1);
            if (tmin > tmax) return false;
        }
    }
    t_enter = tmin;
    return true;
}

double sq_dist_point_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double v = std::max({lo[a] - p[a], 0.0, p[a] - hi[a]});
        d2 += v * v;
    }
    return d2;
}

}  // namespace

ClosestPoint nearest_on_triangle(const Vec3& p, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
    const Vec3 ab = v1 - v0, ac = v2 - v0;
    if (norm(cross(ab, ac)) * 0.5 < 1e-14) throw Error("degenerate triangle");

    // Ericson, Real-Time Collision Detection 5.1.5, with barycentric output.
    const Vec3 ap = p - v0;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {v0, norm2(p - v0), {1, 0, 0}};

    const Vec3 bp = p - v1;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return {v1, norm2(p - v1), {0, 1, 0}};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double t = d1 / (d1 - d3);
        const Vec3 q = v0 + ab * t;
        return {q, norm2(p - q), {1 - t, t, 0}};
    }

    const Vec3 cp = p - v2;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return {v2, norm2(p - v2), {0, 0, 1}};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double t = d2 / (d2 - d6);
        const Vec3 q = v0 + ac * t;
        return {q, norm2(p - q), {1 - t, 0, t}};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        const Vec3 q = v1 + (v2 - v1) * t;
        return {q, norm2(p - q), {0, 1 - t, t}};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    const Vec3 q = v0 + ab * v + ac * w;
    return {q, norm2(p - q), {1 - v - w, v, w}};
}

bool intersect_triangle(const Ray& ray, const Vec3& v0, const Vec3& v1, const Vec3& v2,
                        double r, Hit& hit) {
    const Vec3 e1 = v1 - v0, e2 = v2 - v0;
    const Vec3 pvec = cross(ray.dir, e2);
    const double det = dot(e1, pvec);

    if (std::abs(det) >= kDetEps) {
        const double inv_det = 1.0 / det;
        const Vec3 tvec = ray.origin - v0;
        const double u = dot(tvec, pvec) * inv_det;
        const Vec3 qvec = cross(tvec, e1);
        const double v = dot(ray.dir, qvec) * inv_det;
        const double t = dot(e2, qvec) * inv_det;
        if (u >= -1e-9 && v >= -1e-9 && u + v <= 1.0 + 1e-9 && t >= 0.0) {
            hit.kind = HitKind::Direct;
            hit.t = t;
            hit.point = ray.origin + ray.dir * t;
            hit.bary = {1.0 - u - v, u, v};
            hit.sq_dist = 0.0;
            return true;
        }
    }
    if (r <= 0.0) return false;
    if (norm(cross(e1, e2)) * 0.5 < 1e-14) return false;  // sliver, no usable distance

    // Near miss: minimum ray-triangle distance via the three ray-segment
    // pairs plus the ray origin against the face.
    double best_sq = kInf, best_t = 0.0;
    ClosestPoint best_cp;
    const Vec3 verts[3] = {v0, v1, v2};
    for (int e = 0; e < 3; ++e) {
        const auto [s, u] = ray_segment_closest(ray, verts[e], verts[(e + 1) % 3]);
        const Vec3 rp = ray.origin + ray.dir * s;
        const ClosestPoint cp = nearest_on_triangle(rp, v0, v1, v2);
        if (cp.sq_dist < best_sq) {
            best_sq = cp.sq_dist;
            best_t = s;
            best_cp = cp;
        }
    }
    {
        const ClosestPoint cp = nearest_on_triangle(ray.origin, v0, v1, v2);
        if (cp.sq_dist < best_sq) {
            best_sq = cp.sq_dist;
            best_t = 0.0;
            best_cp = cp;
        }
    }
    if (best_sq <= 0.0 || best_sq > r * r) return false;

    hit.kind = HitKind::NearMiss;
    hit.t = best_t;
    hit.point = ray.origin + ray.dir * best_t;
    hit.bary = {0, 0, 0};
    hit.sq_dist = best_sq;
    hit.tri_point = best_cp.point;
    hit.tri_bary = best_cp.bary;
    return true;
}

Bvh::Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    if (mesh.empty()) throw EmptyMeshError();
    const auto n = static_cast<std::uint32_t>(mesh.faces.size());
    face_order_.resize(n);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t f = 0; f < n; ++f) {
        face_order_[f] = f;
        const auto tri = mesh.triangle(f);
        centroids[f] = (tri[0] + tri[1] + tri[2]) / 3.0;
    }
    nodes_.reserve(2 * n);
    build(0, n, centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
    const auto node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Vec3 lo{kInf, kInf, kInf}, hi{-kInf, -kInf, -kInf};
    Vec3 clo = lo, chi = hi;
    for (std::uint32_t i = begin; i < end; ++i) {
        const auto tri = mesh_->triangle(face_order_[i]);
        for (const auto& v : tri) {
            lo = min3(lo, v);
            hi = max3(hi, v);
        }
        clo = min3(clo, centroids[face_order_[i]]);
        chi = max3(chi, centroids[face_order_[i]]);
    }
    nodes_[node_index].lo = lo;
    nodes_[node_index].hi = hi;

    if (end - begin <= kLeafSize) {
        nodes_[node_index].left = begin;
        nodes_[node_index].count = end - begin;
        return node_index;
    }

    const Vec3 extent = chi - clo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(face_order_.begin() + begin, face_order_.begin() + mid,
                     face_order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                         return centroids[a][axis] < centroids[b][axis];
                     });
    if (centroids[face_order_[begin]][axis] == centroids[face_order_[end - 1]][axis]) {
        // all centroids collapse on the split axis; make a leaf
        nodes_[node_index].left = begin;
        nodes_[node_index].count = end - begin;
        return node_index;
    }

    // left child is always node_index + 1; store the right child index
    build(begin, mid, centroids);
    const std::uint32_t right = build(mid, end, centroids);
    nodes_[node_index].left = right;
    nodes_[node_index].count = 0;
    return node_index;
}

namespace {

void finish_hits(std::vector<Hit>& hits, int k) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.face < b.face;
    });
    if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<std::size_t>(k));
}

}  // namespace

std::vector<Hit> Bvh::ray_intersect_k(const Ray& ray, int k, double r) const {
    std::vector<Hit> hits;
    // k smallest hit t values seen so far; any hit inside a node has
    // t >= the inflated box's entry t, so nodes strictly beyond the kth
    // smallest t cannot contribute (strict comparison keeps ties intact)
    std::priority_queue<double> kth;
    auto bound = [&] { return static_cast<int>(kth.size()) >= k ? kth.top() : kInf; };

    std::vector<std::pair<double, std::uint32_t>> stack;
    double t_enter = 0.0;
    if (slab_hit(ray, nodes_[0].lo, nodes_[0].hi, r, t_enter)) stack.push_back({t_enter, 0});
    while (!stack.empty()) {
        const auto [t_node, ni] = stack.back();
        stack.pop_back();
        if (t_node > bound()) continue;
        const Node& node = nodes_[ni];
        if (node.leaf()) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const std::uint32_t f = face_order_[node.left + i];
                const auto tri = mesh_->triangle(f);
                Hit hit;
                if (intersect_triangle(ray, tri[0], tri[1], tri[2], r, hit)) {
                    hit.face = f;
                    hits.push_back(hit);
                    kth.push(hit.t);
                    if (static_cast<int>(kth.size()) > k) kth.pop();
                }
            }
        } else {
            const std::size_t before = stack.size();
            for (std::uint32_t child : {node.left, ni + 1}) {
                if (slab_hit(ray, nodes_[child].lo, nodes_[child].hi, r, t_enter) &&
                    t_enter <= bound())
                    stack.push_back({t_enter, child});
            }
            // visit the nearer of the two children first to tighten the bound
            if (stack.size() == before + 2 &&
                stack[before].first < stack[before + 1].first)
                std::swap(stack[before], stack[before + 1]);
        }
    }
    finish_hits(hits, k);
    return hits;
}

std::uint32_t Bvh::closest_face_impl(const Vec3& p, ClosestPoint& best) const {
    std::uint32_t best_face = 0;
    // best-first descent with box-distance pruning
    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.emplace(0.0, 0);
    while (!heap.empty()) {
        const auto [d2, ni] = heap.top();
        heap.pop();
        if (d2 >= best.sq_dist) break;
        const Node& node = nodes_[ni];
        if (node.leaf()) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const std::uint32_t f = face_order_[node.left + i];
                const auto tri = mesh_->triangle(f);
                const ClosestPoint cp = nearest_on_triangle(p, tri[0], tri[1], tri[2]);
                if (cp.sq_dist < best.sq_dist) {
                    best = cp;
                    best_face = f;
                }
            }
        } else {
            for (std::uint32_t child : {ni + 1, node.left}) {
                const double cd2 = sq_dist_point_box(p, nodes_[child].lo, nodes_[child].hi);
                if (cd2 < best.sq_dist) heap.emplace(cd2, child);
            }
        }
    }
    return best_face;
}

ClosestPoint Bvh::closest_point(const Vec3& p) const {
    ClosestPoint best;
    best.sq_dist = kInf;
    (void)closest_face_impl(p, best);
    return best;
}

std::uint32_t Bvh::closest_face(const Vec3& p) const {
    ClosestPoint best;
    best.sq_dist = kInf;
    return closest_face_impl(p, best);
}

bool Bvh::segment_occluded(const Vec3& a, const Vec3& b) const {
    const double len = norm(b - a);
    if (len < 1e-12) return false;
    const Ray ray{a, (b - a) / len};
    const double eps = 1e-9;
    double t_enter = 0.0;
    std::vector<std::uint32_t> stack = {0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (!slab_hit(ray, node.lo, node.hi, 0.0, t_enter)) continue;
        if (node.leaf()) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const auto tri = mesh_->triangle(face_order_[node.left + i]);
                Hit hit;
                if (intersect_triangle(ray, tri[0], tri[1], tri[2], 0.0, hit) &&
                    hit.t > eps && hit.t < len - eps)
                    return true;
            }
        } else {
            const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
            stack.push_back(self + 1);
            stack.push_back(node.left);
        }
    }
    return false;
}

std::vector<Hit> ray_intersect_k_brute(const TriangleMesh& mesh, const Ray& ray, int k, double r) {
    std::vector<Hit> hits;
    for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
        const auto tri = mesh.triangle(f);
        Hit hit;
        if (intersect_triangle(ray, tri[0], tri[1], tri[2], r, hit)) {
            hit.face = f;
            hits.push_back(hit);
        }
    }
    finish_hits(hits, k);
    return hits;
}

}  // namespace surfgen
