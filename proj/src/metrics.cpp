#include "surfgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "surfgen/errors.hpp"

namespace surfgen {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (mesh.empty()) throw EmptyMeshError();
    std::vector<double> cum_area(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto tri = mesh.triangle(f);
        total += 0.5 * norm(cross(tri[1] - tri[0], tri[2] - tri[0]));
        cum_area[f] = total;
    }
    if (total <= 0.0) throw Error("mesh has zero surface area");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = uni(rng) * total;
        const auto it = std::lower_bound(cum_area.begin(), cum_area.end(), pick);
        const auto f = static_cast<std::size_t>(it - cum_area.begin());
        const auto tri = mesh.triangle(std::min(f, mesh.faces.size() - 1));
        // uniform barycentric via square-root trick
        const double su = std::sqrt(uni(rng));
        const double v = uni(rng);
        const double w0 = 1.0 - su, w1 = su * (1.0 - v), w2 = su * v;
        cloud.points.push_back(tri[0] * w0 + tri[1] * w1 + tri[2] * w2);
    }
    return cloud;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
    if (a.points.empty() || b.points.empty()) throw Error("chamfer on empty cloud");
    auto one_way = [](const PointCloud& from, const PointCloud& to) {
        double sum = 0.0;
        for (const auto& p : from.points) {
            double best = kInf;
            for (const auto& q : to.points) best = std::min(best, norm2(p - q));
            sum += best;
        }
        return sum / static_cast<double>(from.points.size());
    };
    return one_way(a, b) + one_way(b, a);
}

namespace {

// Exact assignment: successive shortest augmenting paths with potentials
// (Jonker-Volgenant style), O(n^3).
double assignment_exact(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, n), way(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        p[n] = i;
        int j0 = n;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0][j] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != n);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j)
        if (p[j] != n) total += cost[p[j]][j];
    return total;
}

// Forward auction with epsilon scaling; final epsilon 1e-3 / n gives an
// additive bound of 1e-3 * n on the summed cost.
double assignment_auction(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    double max_cost = 0.0;
    for (const auto& row : cost)
        for (double c : row) max_cost = std::max(max_cost, c);

    std::vector<double> price(n, 0.0);
    std::vector<int> owner(n, -1), assigned(n, -1);
    const double eps_final = 1e-3 / n;
    double eps = std::max(eps_final, max_cost / 2.0);

    while (true) {
        std::fill(owner.begin(), owner.end(), -1);
        std::fill(assigned.begin(), assigned.end(), -1);
        std::deque<int> unassigned(n);
        for (int i = 0; i < n; ++i) unassigned[i] = i;

        while (!unassigned.empty()) {
            const int i = unassigned.front();
            unassigned.pop_front();
            // bid for the best (lowest cost + price) object
            double best = kInf, second = kInf;
            int best_j = -1;
            for (int j = 0; j < n; ++j) {
                const double value = cost[i][j] + price[j];
                if (value < best) {
                    second = best;
                    best = value;
                    best_j = j;
                } else if (value < second) {
                    second = value;
                }
            }
            price[best_j] += (second == kInf ? eps : second - best) + eps;
            if (owner[best_j] >= 0) {
                assigned[owner[best_j]] = -1;
                unassigned.push_back(owner[best_j]);
            }
            owner[best_j] = i;
            assigned[i] = best_j;
        }
        if (eps <= eps_final) break;
        eps = std::max(eps_final, eps / 4.0);
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[i][assigned[i]];
    return total;
}

}  // namespace

double emd(const PointCloud& a, const PointCloud& b, std::size_t exact_limit) {
    if (a.size() != b.size()) throw ShapeMismatchError("EMD requires equal point counts");
    if (a.points.empty()) throw Error("EMD on empty cloud");
    const std::size_t n = a.size();
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i][j] = norm(a.points[i] - b.points[j]);
    const double total = n <= exact_limit ? assignment_exact(cost) : assignment_auction(cost);
    return total / static_cast<double>(n);
}

MmdCov mmd_cov(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& test,
               CloudMetric metric) {
    if (generated.empty() || test.empty()) throw Error("mmd_cov on empty set");
    auto dist = [&](const PointCloud& x, const PointCloud& y) {
        return metric == CloudMetric::CD ? chamfer(x, y) : emd(x, y);
    };

    std::vector<std::vector<double>> d(generated.size(), std::vector<double>(test.size()));
    for (std::size_t g = 0; g < generated.size(); ++g)
        for (std::size_t t = 0; t < test.size(); ++t) d[g][t] = dist(generated[g], test[t]);

    MmdCov out;
    double mmd_sum = 0.0;
    for (std::size_t t = 0; t < test.size(); ++t) {
        double best = kInf;
        for (std::size_t g = 0; g < generated.size(); ++g) best = std::min(best, d[g][t]);
        mmd_sum += best;
    }
    out.mmd = mmd_sum / static_cast<double>(test.size());

    std::vector<char> covered(test.size(), 0);
    for (std::size_t g = 0; g < generated.size(); ++g) {
        std::size_t argmin = 0;
        for (std::size_t t = 1; t < test.size(); ++t)
            if (d[g][t] < d[g][argmin]) argmin = t;  // ties keep the lowest index
        covered[argmin] = 1;
    }
    std::size_t n_covered = 0;
    for (char c : covered) n_covered += c;
    out.cov = static_cast<double>(n_covered) / static_cast<double>(test.size());
    return out;
}

double jsd(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& test,
           int grid_res) {
    if (generated.empty() || test.empty()) throw Error("jsd on empty set");
    if (grid_res < 1) throw ConfigError("jsd grid_res must be >= 1");

    auto histogram = [grid_res](const std::vector<PointCloud>& set) {
        std::vector<double> h(static_cast<std::size_t>(grid_res) * grid_res * grid_res, 0.0);
        double total = 0.0;
        for (const auto& cloud : set) {
            for (const auto& p : cloud.points) {
                auto cell = [&](double c) {
                    return std::clamp(static_cast<int>((c + 1.0) / 2.0 * grid_res), 0,
                                      grid_res - 1);
                };
                h[(static_cast<std::size_t>(cell(p.z)) * grid_res + cell(p.y)) * grid_res +
                  cell(p.x)] += 1.0;
                total += 1.0;
            }
        }
        for (double& v : h) v /= total;
        return h;
    };

    const auto p = histogram(generated);
    const auto q = histogram(test);
    double div = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) div += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) div += 0.5 * q[i] * std::log(q[i] / m);
    }
    return div;
}

PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open point cloud: " + path);
    PointCloud cloud;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vec3 p;
        if (ls >> p.x >> p.y >> p.z) cloud.points.push_back(p);
    }
    return cloud;
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write point cloud: " + path);
    out.precision(17);
    for (const auto& p : cloud.points) out << p.x << " " << p.y << " " << p.z << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace surfgen
