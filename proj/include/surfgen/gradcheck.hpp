#pragma once

#include <cstdint>

#include "surfgen/projection.hpp"

namespace surfgen {

struct GradCheckReport {
    int n_directions = 0;
    double max_rel_err_depth = 0.0;
    double max_rel_err_sil = 0.0;
    std::size_t excluded_pixels = 0;  // adjoints zeroed at kink/clamp boundaries
    std::size_t skipped_faces = 0;    // degenerate faces ignored by the tracer

    bool pass(double tol_depth, double tol_sil) const {
        return max_rel_err_depth < tol_depth && max_rel_err_sil < tol_sil;
    }
};

/// Compares project_backward against central finite differences of the
/// frozen-hit-point tape replay, for n_directions random (adjoint,
/// perturbation) pairs per ray mode. Pixels whose recorded hits sit
/// within 1e-6 of a clamp/weight boundary are excluded from the
/// silhouette comparison (the replay is non-smooth there) and counted.
GradCheckReport gradient_check(const TriangleMesh& mesh, const SphereGrid& grid,
                               const ProjectionConfig& config, int n_directions,
                               std::uint64_t seed, double fd_step = 1e-6);

}  // namespace surfgen
