#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "surfgen/errors.hpp"
#include "surfgen/gradcheck.hpp"
#include "surfgen/losses.hpp"
#include "surfgen/marching_cubes.hpp"
#include "surfgen/mesh.hpp"
#include "surfgen/metrics.hpp"
#include "surfgen/optimize.hpp"
#include "surfgen/projection.hpp"
#include "surfgen/sdf_data.hpp"
#include "surfgen/sdf_grid.hpp"
#include "surfgen/sphere_grid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surfgen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDataQuality = 4;

void print_config(const json& config) { std::cerr << config.dump() << "\n"; }

FeatureSet parse_features(const std::string& spec) {
    if (spec == "combined") return kCombinedFeatures;
    if (spec == "all")
        return {"radial_depth", "ortho_depth", "radial_sil", "ortho_sil"};
    FeatureSet features;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const auto comma = spec.find(',', start);
        const auto token = spec.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!token.empty()) {
            static const FeatureSet known = {"radial_depth", "ortho_depth", "radial_sil",
                                             "ortho_sil"};
            if (!known.contains(token)) throw ConfigError("unknown feature channel: " + token);
            features.insert(token);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (features.empty()) throw ConfigError("empty feature set");
    return features;
}

std::vector<PointCloud> load_cloud_dir(const std::string& dir, std::size_t npoints,
                                       std::uint64_t seed) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension();
        if (ext == ".xyz" || ext == ".obj") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("no .xyz or .obj files in " + dir);
    std::vector<PointCloud> clouds;
    for (const auto& p : paths) {
        if (p.extension() == ".xyz")
            clouds.push_back(load_xyz(p.string()));
        else
            clouds.push_back(sample_surface(load_obj(p.string()), npoints, seed));
    }
    return clouds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spherical surface projection toolkit"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "worker threads (1 = bit-exact reproducible)");

    // ---- project ----
    auto* project = app.add_subcommand("project", "project an OBJ mesh to a .sphmap");
    std::string project_mesh, project_out, project_channels = "default";
    int project_nside = 32;
    ProjectionConfig pconf;
    project->add_option("mesh", project_mesh)->required();
    project->add_option("out", project_out)->required();
    project->add_option("--nside", project_nside);
    project->add_option("--channels", project_channels, "default (3 channels) or all");
    project->add_option("--k", pconf.k);
    project->add_option("--r", pconf.r);
    project->add_option("--delta", pconf.delta);
    project->add_option("--background", pconf.background);

    // ---- mcubes ----
    auto* mcubes = app.add_subcommand("mcubes", "extract an isosurface OBJ from an SDF grid");
    std::string mcubes_grid, mcubes_out;
    double mcubes_iso = 0.0;
    mcubes->add_option("grid", mcubes_grid)->required();
    mcubes->add_option("out", mcubes_out)->required();
    mcubes->add_option("--iso", mcubes_iso);

    // ---- optimize ----
    auto* optimize = app.add_subcommand("optimize", "fit an SDF grid to a target mesh's maps");
    std::string opt_grid, opt_target, opt_trace, opt_final_grid, opt_features = "combined";
    OptimConfig oconf;
    int opt_nside = 32;
    optimize->add_option("init_grid", opt_grid)->required();
    optimize->add_option("target_mesh", opt_target)->required();
    optimize->add_option("out_trace", opt_trace)->required();
    optimize->add_option("--final-grid", opt_final_grid);
    optimize->add_option("--features", opt_features, "combined, all, or comma list");
    optimize->add_option("--iters", oconf.iterations);
    optimize->add_option("--step", oconf.step_size);
    optimize->add_option("--seed", oconf.seed);
    optimize->add_option("--nside", opt_nside);
    optimize->add_option("--k", oconf.k);
    optimize->add_option("--r", oconf.r);
    optimize->add_option("--delta", oconf.delta);
    optimize->add_option("--omega", oconf.omega);
    optimize->add_flag("--halve-on-increase", oconf.halve_on_increase);

    // ---- ablation ----
    auto* ablation = app.add_subcommand("ablation", "per-feature-set CD/EMD table");
    std::string abl_grid, abl_target, abl_out;
    OptimConfig aconf;
    aconf.iterations = 30;
    int abl_nside = 32;
    ablation->add_option("init_grid", abl_grid)->required();
    ablation->add_option("target_mesh", abl_target)->required();
    ablation->add_option("out_csv", abl_out)->required();
    ablation->add_option("--iters", aconf.iterations);
    ablation->add_option("--step", aconf.step_size);
    ablation->add_option("--seed", aconf.seed);
    ablation->add_option("--nside", abl_nside);
    ablation->add_option("--r", aconf.r);
    ablation->add_option("--delta", aconf.delta);
    ablation->add_option("--omega", aconf.omega);

    // ---- metrics ----
    auto* metrics = app.add_subcommand("metrics", "set-level metrics between two shape dirs");
    std::string met_a, met_b, met_metric = "both";
    std::size_t met_npoints = 2048;
    int met_jsd_res = 28;
    metrics->add_option("set_a", met_a)->required();
    metrics->add_option("set_b", met_b)->required();
    metrics->add_option("--metric", met_metric, "cd, emd, or both");
    metrics->add_option("--npoints", met_npoints);
    metrics->add_option("--jsd-res", met_jsd_res);

    // ---- gradcheck ----
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_mesh;
    int gc_samples = 100, gc_nside = 8;
    double gc_tol = 1e-4, gc_sil_tol = 1e-3;
    ProjectionConfig gc_conf;
    gradcheck->add_option("mesh", gc_mesh)->required();
    gradcheck->add_option("--samples", gc_samples);
    gradcheck->add_option("--tol", gc_tol);
    gradcheck->add_option("--sil-tol", gc_sil_tol);
    gradcheck->add_option("--nside", gc_nside);
    gradcheck->add_option("--r", gc_conf.r);
    gradcheck->add_option("--delta", gc_conf.delta);

    // ---- sdfsample ----
    auto* sdfsample = app.add_subcommand("sdfsample", "sample SDF training points from a mesh");
    std::string ss_mesh, ss_out;
    SamplingConfig sconf;
    sconf.n_near = 9500;
    sconf.n_uniform = 500;
    sdfsample->add_option("mesh", ss_mesh)->required();
    sdfsample->add_option("out", ss_out)->required();
    sdfsample->add_option("--nnear", sconf.n_near);
    sdfsample->add_option("--nuniform", sconf.n_uniform);
    sdfsample->add_option("--views", sconf.n_views);
    sdfsample->add_option("--offset", sconf.offset);
    sdfsample->add_option("--seed", sconf.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    omp_set_num_threads(threads);

    try {
        if (*project) {
            pconf.all_channels = project_channels == "all";
            pconf.threads = threads;
            print_config({{"cmd", "project"}, {"mesh", project_mesh}, {"out", project_out},
                          {"nside", project_nside}, {"channels", project_channels},
                          {"k", pconf.k}, {"r", pconf.r}, {"delta", pconf.delta},
                          {"background", pconf.background}, {"threads", threads}});
            if (project_channels != "default" && project_channels != "all")
                throw ConfigError("--channels must be 'default' or 'all'");
            const TriangleMesh mesh = load_obj(project_mesh);
            const SphereGrid grid = healpix_grid(project_nside);
            save_sphmap(full_projection(mesh, grid, pconf), project_out);
        } else if (*mcubes) {
            print_config({{"cmd", "mcubes"}, {"grid", mcubes_grid}, {"out", mcubes_out},
                          {"iso", mcubes_iso}});
            const SdfGrid grid = load_sdf_grid(mcubes_grid);
            const TriangleMesh mesh = marching_cubes(grid, mcubes_iso);
            if (mesh.empty()) std::cerr << "warning: no isosurface found, writing empty mesh\n";
            save_obj(mesh, mcubes_out);
        } else if (*optimize) {
            oconf.features = parse_features(opt_features);
            oconf.threads = threads;
            print_config({{"cmd", "optimize"}, {"init_grid", opt_grid}, {"target", opt_target},
                          {"trace", opt_trace}, {"features", feature_set_name(oconf.features)},
                          {"iters", oconf.iterations}, {"step", oconf.step_size},
                          {"seed", oconf.seed}, {"nside", opt_nside}, {"k", oconf.k},
                          {"r", oconf.r}, {"delta", oconf.delta}, {"omega", oconf.omega},
                          {"halve_on_increase", oconf.halve_on_increase}, {"threads", threads}});
            const SdfGrid init = load_sdf_grid(opt_grid);
            const TriangleMesh target = load_obj(opt_target);
            const SphereGrid grid = healpix_grid(opt_nside);
            const OptimResult result = run_optimization(init, target, grid, oconf);
            result.trace.save_csv(opt_trace);
            if (!opt_final_grid.empty()) save_sdf_grid(result.final_grid, opt_final_grid);
        } else if (*ablation) {
            aconf.threads = threads;
            print_config({{"cmd", "ablation"}, {"init_grid", abl_grid}, {"target", abl_target},
                          {"out", abl_out}, {"iters", aconf.iterations}, {"step", aconf.step_size},
                          {"seed", aconf.seed}, {"nside", abl_nside}, {"threads", threads}});
            const SdfGrid init = load_sdf_grid(abl_grid);
            const TriangleMesh target = load_obj(abl_target);
            const SphereGrid grid = healpix_grid(abl_nside);
            const std::vector<FeatureSet> sets = {
                {"radial_depth"}, {"ortho_depth"}, {"radial_sil"}, {"ortho_sil"},
                kCombinedFeatures};
            const auto rows =
                ablation_table(init, target, grid, aconf, sets, {5, 10, aconf.iterations});
            save_ablation_csv(rows, abl_out);
        } else if (*metrics) {
            print_config({{"cmd", "metrics"}, {"set_a", met_a}, {"set_b", met_b},
                          {"metric", met_metric}, {"npoints", met_npoints},
                          {"jsd_res", met_jsd_res}});
            if (met_metric != "cd" && met_metric != "emd" && met_metric != "both")
                throw ConfigError("--metric must be cd, emd, or both");
            const auto gen = load_cloud_dir(met_a, met_npoints, 0);
            const auto test = load_cloud_dir(met_b, met_npoints, 0);
            json report;
            if (met_metric != "emd") {
                const auto cd = mmd_cov(gen, test, CloudMetric::CD);
                report["mmd_cd"] = cd.mmd;
                report["cov_cd"] = cd.cov;
            }
            if (met_metric != "cd") {
                for (std::size_t i = 1; i < gen.size(); ++i)
                    if (gen[i].size() != gen[0].size())
                        throw ConfigError("EMD requires equal point counts per cloud");
                const auto em = mmd_cov(gen, test, CloudMetric::EMD);
                report["mmd_emd"] = em.mmd;
                report["cov_emd"] = em.cov;
            }
            report["jsd"] = jsd(gen, test, met_jsd_res);
            std::cout << report.dump(2) << "\n";
        } else if (*gradcheck) {
            print_config({{"cmd", "gradcheck"}, {"mesh", gc_mesh}, {"samples", gc_samples},
                          {"tol", gc_tol}, {"sil_tol", gc_sil_tol}, {"nside", gc_nside},
                          {"r", gc_conf.r}, {"delta", gc_conf.delta}});
            const TriangleMesh mesh = load_obj(gc_mesh);
            const SphereGrid grid = healpix_grid(gc_nside);
            const GradCheckReport report =
                gradient_check(mesh, grid, gc_conf, gc_samples, /*seed=*/1234);
            json out = {{"n_directions", report.n_directions},
                        {"max_rel_err_depth", report.max_rel_err_depth},
                        {"max_rel_err_sil", report.max_rel_err_sil},
                        {"excluded_pixels", report.excluded_pixels},
                        {"skipped_faces", report.skipped_faces},
                        {"pass", report.pass(gc_tol, gc_sil_tol)}};
            std::cout << out.dump(2) << "\n";
            return report.pass(gc_tol, gc_sil_tol) ? kExitOk : 1;
        } else if (*sdfsample) {
            print_config({{"cmd", "sdfsample"}, {"mesh", ss_mesh}, {"out", ss_out},
                          {"nnear", sconf.n_near}, {"nuniform", sconf.n_uniform},
                          {"views", sconf.n_views}, {"offset", sconf.offset},
                          {"seed", sconf.seed}});
            const TriangleMesh mesh = load_obj(ss_mesh);
            const SdfSampleSet samples = sample_training_points(mesh, sconf);
            if (!inside_fraction_filter(samples, sconf.offset)) {
                std::cerr << "shape rejected: fewer than 0.5% of sampled points are inside\n";
                return kExitDataQuality;
            }
            save_sdf_samples(samples, ss_out);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
