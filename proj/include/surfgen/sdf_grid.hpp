#pragma once

#include <string>
#include <vector>

#include "surfgen/vec3.hpp"

namespace surfgen {

/// Value plus spatial gradient of the trilinear field at a point.
struct FieldSample {
    double value = 0.0;
    Vec3 gradient;
};

/// Regular scalar field over [-1,1]^3, negative inside. Values stored
/// x-fastest; the grid values are the optimizable field parameters.
class SdfGrid {
  public:
    SdfGrid() = default;
    SdfGrid(int resolution, std::vector<double> values);

    /// Grid filled from an analytic field evaluated at the nodes.
    template <class F>
    static SdfGrid from_function(int resolution, F&& field) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(resolution) * resolution * resolution);
        const double h = 2.0 / (resolution - 1);
        for (int k = 0; k < resolution; ++k)
            for (int j = 0; j < resolution; ++j)
                for (int i = 0; i < resolution; ++i)
                    values.push_back(field(Vec3{-1.0 + i * h, -1.0 + j * h, -1.0 + k * h}));
        return SdfGrid(resolution, std::move(values));
    }

    int resolution() const { return res_; }
    double spacing() const { return 2.0 / (res_ - 1); }
    std::size_t size() const { return values_.size(); }

    double at(int i, int j, int k) const { return values_[index(i, j, k)]; }
    double& at(int i, int j, int k) { return values_[index(i, j, k)]; }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * res_ + j) * res_ + i;
    }
    Vec3 node_position(int i, int j, int k) const {
        const double h = spacing();
        return {-1.0 + i * h, -1.0 + j * h, -1.0 + k * h};
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Trilinear value and its analytic gradient. Throws OutOfDomainError
    /// outside [-1,1]^3.
    FieldSample sample(const Vec3& p) const;

  private:
    int res_ = 0;
    std::vector<double> values_;
};

/// Per-vertex and per-grid-value gradient accumulators, zero-initialized.
struct AdjointBuffers {
    std::vector<Vec3> vertex_grads;
    std::vector<double> field_grads;

    AdjointBuffers(std::size_t n_vertices, std::size_t n_field)
        : vertex_grads(n_vertices), field_grads(n_field, 0.0) {}
};

// "SDFGRID v1" header + R^3 little-endian float32, x-fastest.
SdfGrid load_sdf_grid(const std::string& path);
void save_sdf_grid(const SdfGrid& grid, const std::string& path);

}  // namespace surfgen
