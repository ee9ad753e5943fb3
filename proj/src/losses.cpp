#include "surfgen/losses.hpp"

#include <algorithm>
#include <cmath>

#include "surfgen/errors.hpp"

namespace surfgen {

std::vector<double> reparameterize(const LatentState& state, std::span<const double> eps) {
    if (state.mu.size() != state.sigma.size() || state.mu.size() != eps.size())
        throw ShapeMismatchError("latent dimension mismatch");
    std::vector<double> z(state.mu.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = state.mu[i] + state.sigma[i] * eps[i];
    return z;
}

double clamped_l1(std::span<const double> pred, std::span<const double> target, double clamp_t) {
    if (pred.size() != target.size()) throw ShapeMismatchError("clamped_l1 length mismatch");
    if (pred.empty()) throw Error("clamped_l1 on empty input");
    if (clamp_t <= 0.0) throw ConfigError("clamp threshold must be positive");
    auto clamp = [clamp_t](double x) { return std::clamp(x, -clamp_t, clamp_t); };
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(clamp(pred[i]) - clamp(target[i]));
    return sum / static_cast<double>(pred.size());
}

double kld_diag_gaussian(const LatentState& state) {
    if (state.mu.size() != state.sigma.size()) throw ShapeMismatchError("latent dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < state.mu.size(); ++i) {
        const double s = state.sigma[i];
        if (s <= 0.0) throw Error("sigma must be positive");
        sum += state.mu[i] * state.mu[i] + s * s - 1.0 - 2.0 * std::log(s);
    }
    return 0.5 * sum;
}

namespace {
double mean(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}
}  // namespace

double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
    if (real_scores.empty() || fake_scores.empty()) throw Error("hinge_d_loss on empty input");
    double real_term = 0.0, fake_term = 0.0;
    for (double s : real_scores) real_term += std::max(0.0, 1.0 - s);
    for (double s : fake_scores) fake_term += std::max(0.0, 1.0 + s);
    return real_term / static_cast<double>(real_scores.size()) +
           fake_term / static_cast<double>(fake_scores.size());
}

double hinge_g_loss(std::span<const double> fake_scores) {
    if (fake_scores.empty()) throw Error("hinge_g_loss on empty input");
    return -mean(fake_scores);
}

double feature_matching(const std::vector<std::vector<double>>& real_feats,
                        const std::vector<std::vector<double>>& fake_feats) {
    if (real_feats.size() != fake_feats.size())
        throw ShapeMismatchError("feature list length mismatch");
    const std::size_t used = std::min<std::size_t>(real_feats.size(), 4);
    if (used == 0) throw Error("feature_matching on empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
        if (real_feats[i].size() != fake_feats[i].size() || real_feats[i].empty())
            throw ShapeMismatchError("feature map shape mismatch");
        double mae = 0.0;
        for (std::size_t j = 0; j < real_feats[i].size(); ++j)
            mae += std::abs(real_feats[i][j] - fake_feats[i][j]);
        sum += mae / static_cast<double>(real_feats[i].size());
    }
    return sum / static_cast<double>(used);
}

double total_objective(double gan, double sdf, double kld, double feat, const LossWeights& w) {
    return w.alpha * (gan + w.lambda * feat) + w.beta * sdf + w.gamma * kld;
}

MseResult spherical_mse(const SphericalMap& a, const SphericalMap& b) {
    if (a.grid == nullptr || b.grid == nullptr || !(*a.grid == *b.grid))
        throw Error("spherical_mse: maps use different sphere grids");
    if (a.channels.size() != b.channels.size())
        throw Error("spherical_mse: channel sets differ");

    // first pass: count valid pixels for the 1/N normalization
    std::size_t n_valid = 0;
    for (const auto& ca : a.channels) {
        const ChannelData* cb = b.find(ca.name);
        if (cb == nullptr) throw Error("spherical_mse: channel " + ca.name + " missing");
        for (std::size_t i = 0; i < ca.values.size(); ++i)
            if (ca.valid[i] && cb->valid[i]) ++n_valid;
    }
    if (n_valid == 0) throw Error("spherical_mse: no valid pixels");

    MseResult out;
    const double inv_n = 1.0 / static_cast<double>(n_valid);
    for (const auto& ca : a.channels) {
        const ChannelData* cb = b.find(ca.name);
        std::vector<double> adj(ca.values.size(), 0.0);
        for (std::size_t i = 0; i < ca.values.size(); ++i) {
            if (!ca.valid[i] || !cb->valid[i]) continue;
            const double res = ca.values[i] - cb->values[i];
            out.value += res * res * inv_n;
            adj[i] = 2.0 * res * inv_n;
        }
        MapGrads& grads = ca.name.rfind("radial", 0) == 0 ? out.radial : out.ortho;
        if (ca.name.find("depth") != std::string::npos)
            grads.depth = std::move(adj);
        else
            grads.sil = std::move(adj);
    }
    return out;
}

}  // namespace surfgen
