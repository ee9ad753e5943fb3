#pragma once

#include <span>
#include <vector>

#include "surfgen/projection.hpp"

namespace surfgen {

/// Diagonal-Gaussian posterior parameters of one shape embedding.
struct LatentState {
    std::vector<double> mu;
    std::vector<double> sigma;  // > 0 elementwise
};

struct LossWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1e-5;
    double lambda = 0.5;
    double clamp_t = 0.1;
};

/// mu + sigma (*) eps.
std::vector<double> reparameterize(const LatentState& state, std::span<const double> eps);

/// Mean |clamp(pred, +-T) - clamp(target, +-T)|.
double clamped_l1(std::span<const double> pred, std::span<const double> target, double clamp_t);

/// 0.5 * sum(mu^2 + sigma^2 - 1 - 2 ln sigma) against a standard normal prior.
double kld_diag_gaussian(const LatentState& state);

/// mean(relu(1 - real)) + mean(relu(1 + fake)).
double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores);

/// -mean(fake).
double hinge_g_loss(std::span<const double> fake_scores);

/// Mean over feature maps (at most the first four) of mean absolute difference.
double feature_matching(const std::vector<std::vector<double>>& real_feats,
                        const std::vector<std::vector<double>>& fake_feats);

/// alpha * (gan + lambda * feat) + beta * sdf + gamma * kld.
double total_objective(double gan, double sdf, double kld, double feat, const LossWeights& w);

struct MseResult {
    double value = 0.0;
    MapGrads radial;  // adjoints w.r.t. `a`, per ray mode
    MapGrads ortho;
};

/// Pixel-wise MSE over the shared valid pixels of all matching channels,
/// with the adjoint 2(a-b)/N per pixel packed into per-mode gradients.
MseResult spherical_mse(const SphericalMap& a, const SphericalMap& b);

}  // namespace surfgen
