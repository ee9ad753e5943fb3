#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "surfgen/projection.hpp"
#include "surfgen/sdf_grid.hpp"
#include "surfgen/sphere_grid.hpp"

namespace surfgen {

/// Feature channels selectable for the optimization loss.
using FeatureSet = std::set<std::string>;  // subset of the four channel names

inline const FeatureSet kCombinedFeatures = {"radial_depth", "ortho_depth", "ortho_sil"};

struct OptimConfig {
    FeatureSet features = kCombinedFeatures;
    int iterations = 200;
    double step_size = 1e3;
    int k = 8;
    double r = 0.02;
    double delta = 1e-4;
    double omega = 1e-4;
    double background = 2.0;
    bool halve_on_increase = false;  // line-search-lite mode
    std::uint64_t seed = 0;
    std::size_t metric_samples = 2048;
    int threads = 0;
};

struct TraceRow {
    int iter = 0;
    double loss = 0.0;
    double cd = 0.0;
    double emd = 0.0;
    long euler = 0;
    std::size_t n_vertices = 0;
    std::size_t n_faces = 0;
};

struct OptimTrace {
    std::vector<TraceRow> rows;  // iterations + 1 entries, initial state first
    bool surface_vanished = false;

    void save_csv(const std::string& path) const;
};

struct OptimResult {
    SdfGrid final_grid;
    OptimTrace trace;
};

/// Gradient descent on the grid values: per iteration, extract the
/// isosurface, project it, take the spherical MSE against the target's
/// cached maps on the selected features, mask depth gradients by target
/// occupancy, backpropagate to vertices and route into the field.
/// Metrics per row use `metric_samples` surface samples of both meshes.
OptimResult run_optimization(const SdfGrid& init_grid, const TriangleMesh& target_mesh,
                             const SphereGrid& grid, const OptimConfig& config);

struct AblationRow {
    std::string features;
    int iter = 0;
    double cd = 0.0;
    double emd = 0.0;
};

/// Runs one optimization per feature set with identical config/seed and
/// samples CD/EMD at the checkpoints.
std::vector<AblationRow> ablation_table(const SdfGrid& init_grid, const TriangleMesh& target_mesh,
                                        const SphereGrid& grid, const OptimConfig& base_config,
                                        const std::vector<FeatureSet>& feature_sets,
                                        const std::vector<int>& checkpoints);

void save_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path);

std::string feature_set_name(const FeatureSet& features);

}  // namespace surfgen
