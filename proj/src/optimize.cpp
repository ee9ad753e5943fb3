#include "surfgen/optimize.hpp"

#include <fstream>

#include "surfgen/errors.hpp"
#include "surfgen/losses.hpp"
#include "surfgen/marching_cubes.hpp"
#include "surfgen/mesh_to_field.hpp"
#include "surfgen/metrics.hpp"

namespace surfgen {

namespace {

ProjectionConfig projection_config(const OptimConfig& c) {
    ProjectionConfig pc;
    pc.k = c.k;
    pc.r = c.r;
    pc.delta = c.delta;
    pc.background = c.background;
    pc.all_channels = true;
    pc.threads = c.threads;
    return pc;
}

SphericalMap select_channels(const SphericalMap& map, const FeatureSet& features) {
    SphericalMap out;
    out.grid = map.grid;
    out.background_depth = map.background_depth;
    for (const auto& c : map.channels)
        if (features.contains(c.name)) out.channels.push_back(c);
    return out;
}

struct IterationState {
    TriangleMesh mesh;
    FullProjection projection;
    MseResult mse;
};

IterationState evaluate(const SdfGrid& grid_field, const SphereGrid& sphere,
                        const SphericalMap& target_subset, const OptimConfig& config) {
    IterationState st;
    st.mesh = marching_cubes(grid_field);
    if (st.mesh.empty()) return st;
    st.projection = full_projection_with_tape(st.mesh, sphere, projection_config(config));
    const SphericalMap gen_subset = select_channels(st.projection.map, config.features);
    st.mse = spherical_mse(gen_subset, target_subset);
    return st;
}

void apply_update(SdfGrid& grid_field, const std::vector<double>& field_grads, double step) {
    auto& values = grid_field.values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= step * field_grads[i];
}

std::vector<double> compute_field_grads(const IterationState& st, const SdfGrid& grid_field,
                                        const SphericalMap& target_full,
                                        const OptimConfig& config) {
    // depth gradients only flow where the target has full occupancy
    MapGrads radial = st.mse.radial;
    MapGrads ortho = st.mse.ortho;
    if (!radial.depth.empty())
        radial.depth = mask_depth_gradient(radial.depth, target_full.find("radial_sil")->values);
    if (!ortho.depth.empty())
        ortho.depth = mask_depth_gradient(ortho.depth, target_full.find("ortho_sil")->values);

    std::vector<Vec3> vertex_grads(st.mesh.vertices.size());
    auto accumulate = [&](const ProjectionTape& tape, const MapGrads& grads) {
        if (grads.depth.empty() && grads.sil.empty()) return;
        const auto g = project_backward(tape, st.mesh, grads, config.threads);
        for (std::size_t i = 0; i < vertex_grads.size(); ++i) vertex_grads[i] += g[i];
    };
    accumulate(st.projection.radial_tape, radial);
    accumulate(st.projection.ortho_tape, ortho);

    return route_surface_gradient(st.mesh, grid_field, vertex_grads, config.omega).field_grads;
}

}  // namespace

OptimResult run_optimization(const SdfGrid& init_grid, const TriangleMesh& target_mesh,
                             const SphereGrid& grid, const OptimConfig& config) {
    if (config.features.empty()) throw ConfigError("feature set must be non-empty");
    if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
    if (config.step_size <= 0.0) throw ConfigError("step_size must be positive");

    const SphericalMap target_full =
        full_projection(target_mesh, grid, projection_config(config));
    const SphericalMap target_subset = select_channels(target_full, config.features);
    const PointCloud target_cloud =
        sample_surface(target_mesh, config.metric_samples, config.seed);

    OptimResult result{init_grid, {}};
    double step = config.step_size;
    double prev_loss = 0.0;

    IterationState st = evaluate(result.final_grid, grid, target_subset, config);
    for (int iter = 0; iter <= config.iterations; ++iter) {
        if (st.mesh.empty()) {
            result.trace.surface_vanished = true;
            break;
        }
        TraceRow row;
        row.iter = iter;
        row.loss = st.mse.value;
        const PointCloud gen_cloud =
            sample_surface(st.mesh, config.metric_samples, config.seed);
        row.cd = chamfer(gen_cloud, target_cloud);
        row.emd = emd(gen_cloud, target_cloud);
        row.euler = euler_characteristic(st.mesh);
        row.n_vertices = st.mesh.vertices.size();
        row.n_faces = st.mesh.faces.size();
        result.trace.rows.push_back(row);
        if (iter == config.iterations) break;

        const auto field_grads = compute_field_grads(st, result.final_grid, target_full, config);

        if (!config.halve_on_increase) {
            apply_update(result.final_grid, field_grads, step);
            st = evaluate(result.final_grid, grid, target_subset, config);
        } else {
            const SdfGrid snapshot = result.final_grid;
            for (int attempt = 0; attempt < 30; ++attempt) {
                result.final_grid = snapshot;
                apply_update(result.final_grid, field_grads, step);
                st = evaluate(result.final_grid, grid, target_subset, config);
                if (!st.mesh.empty() && st.mse.value <= row.loss) break;
                step *= 0.5;
            }
        }
        prev_loss = row.loss;
    }
    (void)prev_loss;
    return result;
}

std::vector<AblationRow> ablation_table(const SdfGrid& init_grid, const TriangleMesh& target_mesh,
                                        const SphereGrid& grid, const OptimConfig& base_config,
                                        const std::vector<FeatureSet>& feature_sets,
                                        const std::vector<int>& checkpoints) {
    std::vector<AblationRow> rows;
    for (const auto& features : feature_sets) {
        OptimConfig config = base_config;
        config.features = features;
        const OptimResult result = run_optimization(init_grid, target_mesh, grid, config);
        for (int cp : checkpoints) {
            AblationRow row;
            row.features = feature_set_name(features);
            row.iter = cp;
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(cp),
                                                   result.trace.rows.size() - 1);
            row.cd = result.trace.rows[idx].cd;
            row.emd = result.trace.rows[idx].emd;
            rows.push_back(row);
        }
    }
    return rows;
}

void OptimTrace::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace: " + path);
    out << "iter,loss,cd,emd,euler,nverts,nfaces\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.iter << "," << r.loss << "," << r.cd << "," << r.emd << "," << r.euler << ","
            << r.n_vertices << "," << r.n_faces << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void save_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ablation table: " + path);
    out << "features,iter,cd,emd\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.features << "," << r.iter << "," << r.cd << "," << r.emd << "\n";
    if (!out) throw IoError("write failed: " + path);
}

std::string feature_set_name(const FeatureSet& features) {
    std::string name;
    for (const auto& f : features) {
        if (!name.empty()) name += "+";
        name += f;
    }
    return name;
}

}  // namespace surfgen
