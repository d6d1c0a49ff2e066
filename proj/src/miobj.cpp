// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/miobj.hpp"

#include <cmath>

namespace stdpose {

namespace F = torch::nn::functional;

void MILossWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0) {
        throw InvalidArgument("MI loss weights must be non-negative");
    }
}

MIEstimatorImpl::MIEstimatorImpl(const MIEstimatorConfig& config)
    : config_(config), generator_(at::detail::createCPUGenerator(config.seed)) {
    int64_t in_x = config.x_dim;
    int64_t in_y = config.y_dim;
    if (config.proj_dim > 0) {
        proj_x_ = register_module("proj_x", torch::nn::Linear(config.x_dim, config.proj_dim));
        proj_y_ = register_module("proj_y", torch::nn::Linear(config.y_dim, config.proj_dim));
        in_x = in_y = config.proj_dim;
    }
    fc1_ = register_module("fc1", torch::nn::Linear(in_x + in_y, config.hidden));
    fc2_ = register_module("fc2", torch::nn::Linear(config.hidden, config.hidden));
    fc3_ = register_module("fc3", torch::nn::Linear(config.hidden, 1));
}

torch::Tensor MIEstimatorImpl::scores(const torch::Tensor& x, const torch::Tensor& y) {
    auto px = proj_x_ ? proj_x_->forward(x) : x;
    auto py = proj_y_ ? proj_y_->forward(y) : y;
    auto h = F::relu(fc1_->forward(torch::cat({px, py}, 1)));
    h = F::relu(fc2_->forward(h));
    return fc3_->forward(h).squeeze(1);
}

torch::Tensor MIEstimatorImpl::shuffle(const torch::Tensor& y) {
    const auto perm = torch::randperm(y.size(0), generator_, torch::TensorOptions().dtype(torch::kLong));
    return y.index_select(0, perm);
}

torch::Tensor MIEstimatorImpl::estimate(const torch::Tensor& x, const torch::Tensor& y) {
    const auto joint = scores(x, y);
    const auto marginal = scores(x, shuffle(y));
    const double log_n = std::log(static_cast<double>(x.size(0)));
    return joint.mean() - (torch::logsumexp(marginal, 0) - log_n);
}

torch::Tensor MIEstimatorImpl::training_objective(const torch::Tensor& x, const torch::Tensor& y) {
    const auto joint = scores(x, y);
    const auto marginal = scores(x, shuffle(y));
    const double log_n = std::log(static_cast<double>(x.size(0)));
    const auto log_mean_exp = torch::logsumexp(marginal, 0) - log_n;
    const double batch_mean = std::exp(log_mean_exp.item<double>());
    ema_ = ema_ < 0.0 ? batch_mean : config_.ema_decay * ema_ + (1.0 - config_.ema_decay) * batch_mean;
    // value equals the DV bound; gradient of the second term is scaled by 1 / ema
    const auto denom = torch::exp(log_mean_exp);
    const auto corrected = denom / ema_;
    return joint.mean() - log_mean_exp.detach() - (corrected - corrected.detach());
}

torch::Tensor estimate_mi(const torch::Tensor& samples_x, const torch::Tensor& samples_y, MIEstimator& estimator) {
    if (samples_x.dim() != 2 || samples_y.dim() != 2 || samples_x.size(0) != samples_y.size(0)) {
        throw InvalidArgument("estimate_mi: expected paired (N, d) sample batches");
    }
    if (samples_x.size(0) < 2) {
        throw InvalidArgument("estimate_mi: batch size must be at least 2");
    }
    return estimator->estimate(samples_x, samples_y);
}

void fit_estimator(const torch::Tensor& samples_x, const torch::Tensor& samples_y, MIEstimator& estimator,
                   int steps, int batch_size, double lr, std::uint64_t seed) {
    if (samples_x.size(0) < 2 || samples_x.size(0) != samples_y.size(0)) {
        throw InvalidArgument("fit_estimator: expected at least two paired samples");
    }
    auto gen = at::detail::createCPUGenerator(seed);
    torch::optim::Adam opt(estimator->parameters(), torch::optim::AdamOptions(lr));
    const int64_t n = samples_x.size(0);
    const int64_t b = std::min<int64_t>(batch_size, n);
    for (int step = 0; step < steps; ++step) {
        const auto idx = torch::randperm(n, gen, torch::TensorOptions().dtype(torch::kLong)).slice(0, 0, b);
        opt.zero_grad();
        const auto objective = estimator->training_objective(samples_x.index_select(0, idx),
                                                             samples_y.index_select(0, idx));
        (-objective).backward();
        opt.step();
    }
}

torch::Tensor pool_for_mi(const torch::Tensor& maps, int64_t grid_h, int64_t grid_w) {
    return F::adaptive_avg_pool2d(maps, F::AdaptiveAvgPool2dFuncOptions({grid_h, grid_w})).flatten(1);
}

torch::Tensor combine_mi_terms(const MITerms& t, const MILossWeights& w) {
    w.validate();
    if (w.alpha == 0.0 && w.beta == 0.0) {
        return torch::zeros({});
    }
    return -w.alpha * (t.label_fused - t.fused_key) - w.beta * (t.label_merged - t.merged_key);
}

double combine_mi_terms(double label_fused, double fused_key, double label_merged, double merged_key,
                        const MILossWeights& w) {
    w.validate();
    return -w.alpha * (label_fused - fused_key) - w.beta * (label_merged - merged_key);
}

MutualInformationObjectiveImpl::MutualInformationObjectiveImpl(int64_t joints, int64_t feature_dim,
                                                               const MIObjectiveConfig& config)
    : config_(config) {
    const int64_t cells = config.grid_h * config.grid_w;
    auto make = [&](const char* name, int64_t dx, int64_t dy, std::uint64_t salt) {
        MIEstimatorConfig c{.x_dim = dx,
                            .y_dim = dy,
                            .proj_dim = config.proj_dim,
                            .hidden = config.hidden,
                            .ema_decay = config.ema_decay,
                            .seed = config.seed * 4 + salt};
        return register_module(name, MIEstimator(c));
    };
    label_fused_ = make("label_fused", joints * cells, feature_dim * cells, 0);
    fused_key_ = make("fused_key", feature_dim * cells, feature_dim * cells, 1);
    label_merged_ = make("label_merged", joints * cells, joints * cells, 2);
    merged_key_ = make("merged_key", joints * cells, joints * cells, 3);
}

void MutualInformationObjectiveImpl::check_shapes(const torch::Tensor& g, const torch::Tensor& fused,
                                                  const torch::Tensor& key_features, const torch::Tensor& merged,
                                                  const torch::Tensor& key_heatmaps) const {
    if (!fused.sizes().equals(key_features.sizes()) || fused.dim() != 4) {
        throw InvalidArgument("mi_loss: fused and key features must share one (B, C, h, w) shape");
    }
    if (!g.sizes().equals(merged.sizes()) || !g.sizes().equals(key_heatmaps.sizes())) {
        throw InvalidArgument("mi_loss: label, merged and key heatmaps must share one shape");
    }
    if (g.size(0) != fused.size(0)) {
        throw InvalidArgument("mi_loss: batch sizes differ");
    }
    if (g.size(0) < 2) {
        throw InvalidArgument("mi_loss: batch size must be at least 2");
    }
}

MITerms MutualInformationObjectiveImpl::terms(const torch::Tensor& g, const torch::Tensor& fused,
                                              const torch::Tensor& key_features, const torch::Tensor& merged,
                                              const torch::Tensor& key_heatmaps) {
    check_shapes(g, fused, key_features, merged, key_heatmaps);
    auto pool = [&](const torch::Tensor& t) { return pool_for_mi(t, config_.grid_h, config_.grid_w); };
    const auto y = pool(g);
    const auto pf = pool(fused);
    const auto pm = pool(merged);
    // key-frame features and heatmaps are reference targets: only the fused
    // and merged representations are shaped by the objective
    return {label_fused_->estimate(y, pf), fused_key_->estimate(pf, pool(key_features.detach())),
            label_merged_->estimate(y, pm), merged_key_->estimate(pm, pool(key_heatmaps.detach()))};
}

torch::Tensor MutualInformationObjectiveImpl::estimator_objective(const torch::Tensor& g, const torch::Tensor& fused,
                                                                  const torch::Tensor& key_features,
                                                                  const torch::Tensor& merged,
                                                                  const torch::Tensor& key_heatmaps) {
    check_shapes(g, fused, key_features, merged, key_heatmaps);
    auto pool = [&](const torch::Tensor& t) { return pool_for_mi(t.detach(), config_.grid_h, config_.grid_w); };
    const auto y = pool(g);
    const auto pf = pool(fused);
    const auto pm = pool(merged);
    return label_fused_->training_objective(y, pf) + fused_key_->training_objective(pf, pool(key_features)) +
           label_merged_->training_objective(y, pm) + merged_key_->training_objective(pm, pool(key_heatmaps));
}

MILossResult mi_loss(const torch::Tensor& g, const torch::Tensor& fused, const torch::Tensor& key_features,
                     const torch::Tensor& merged, const torch::Tensor& key_heatmaps, const MILossWeights& weights,
                     MutualInformationObjective& objective) {
    weights.validate();
    if (weights.alpha == 0.0 && weights.beta == 0.0) {
        return {torch::zeros({}), {}};
    }
    auto terms = objective->terms(g, fused, key_features, merged, key_heatmaps);
    return {combine_mi_terms(terms, weights), terms};
}

}  // namespace stdpose
