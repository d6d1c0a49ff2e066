// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "stdpose/errors.hpp"

namespace stdpose {

struct MILossWeights {
    double alpha = 0.1;
    double beta = 0.01;

    void validate() const;
};

struct MIEstimatorConfig {
    int64_t x_dim = 1;
    int64_t y_dim = 1;
    int64_t proj_dim = 64;    // 0 feeds the raw vectors to the statistics network
    int64_t hidden = 128;
    double ema_decay = 0.99;
    std::uint64_t seed = 0;   // drives the in-batch shuffles
};

/// Donsker-Varadhan lower bound on I(X; Y) with a statistics network
/// T(x, y): E_joint[T] - log E_marginal[exp T], where marginal pairs come from
/// an in-batch shuffle of y.
class MIEstimatorImpl : public torch::nn::Module {
public:
    explicit MIEstimatorImpl(const MIEstimatorConfig& config);

    /// T(x_i, y_i), shape (N).
    torch::Tensor scores(const torch::Tensor& x, const torch::Tensor& y);

    /// Bound value in nats; differentiable w.r.t. inputs and parameters.
    torch::Tensor estimate(const torch::Tensor& x, const torch::Tensor& y);

    /// Quantity to maximise when fitting the estimator. Same value-space as
    /// estimate() but the denominator gradient is rescaled by a moving
    /// average of E_marginal[exp T], which removes the minibatch bias.
    torch::Tensor training_objective(const torch::Tensor& x, const torch::Tensor& y);

    const MIEstimatorConfig& config() const { return config_; }

private:
    torch::Tensor shuffle(const torch::Tensor& y);

    MIEstimatorConfig config_;
    at::Generator generator_;
    double ema_ = -1.0;
    torch::nn::Linear proj_x_{nullptr}, proj_y_{nullptr};
    torch::nn::Linear fc1_{nullptr}, fc2_{nullptr}, fc3_{nullptr};
};
TORCH_MODULE(MIEstimator);

/// Throws unless the batches are paired and hold at least two samples.
torch::Tensor estimate_mi(const torch::Tensor& samples_x, const torch::Tensor& samples_y, MIEstimator& estimator);

/// Minibatch Adam fit of an estimator on a fixed sample set.
void fit_estimator(const torch::Tensor& samples_x, const torch::Tensor& samples_y, MIEstimator& estimator,
                   int steps, int batch_size, double lr, std::uint64_t seed);

/// Spatial average pooling to a coarse grid, flattened to (B, C * gh * gw).
torch::Tensor pool_for_mi(const torch::Tensor& maps, int64_t grid_h, int64_t grid_w);

struct MITerms {
    torch::Tensor label_fused;      // I(y; F~)
    torch::Tensor fused_key;        // I(F~; F_t)
    torch::Tensor label_merged;     // I(y; H~)
    torch::Tensor merged_key;       // I(H~; H_t)
};

/// -alpha [I(y;F~) - I(F~;F_t)] - beta [I(y;H~) - I(H~;H_t)]. Both weights
/// zero gives exactly 0.
torch::Tensor combine_mi_terms(const MITerms& terms, const MILossWeights& weights);
double combine_mi_terms(double label_fused, double fused_key, double label_merged, double merged_key,
                        const MILossWeights& weights);

struct MIObjectiveConfig {
    int64_t grid_h = 1;   // 1x1 is a spatial mean-pool
    int64_t grid_w = 1;
    int64_t proj_dim = 64;
    int64_t hidden = 128;
    double ema_decay = 0.99;
    std::uint64_t seed = 0;
};

/// The four estimators of the simplified objective. Labels enter as the
/// ground-truth heatmaps G.
class MutualInformationObjectiveImpl : public torch::nn::Module {
public:
    MutualInformationObjectiveImpl(int64_t joints, int64_t feature_dim, const MIObjectiveConfig& config);

    MITerms terms(const torch::Tensor& gt_heatmaps, const torch::Tensor& fused, const torch::Tensor& key_features,
                  const torch::Tensor& merged, const torch::Tensor& key_heatmaps);

    /// Sum of the four training objectives on detached inputs, to maximise
    /// w.r.t. the estimator parameters only.
    torch::Tensor estimator_objective(const torch::Tensor& gt_heatmaps, const torch::Tensor& fused,
                                      const torch::Tensor& key_features, const torch::Tensor& merged,
                                      const torch::Tensor& key_heatmaps);

private:
    void check_shapes(const torch::Tensor& gt_heatmaps, const torch::Tensor& fused, const torch::Tensor& key_features,
                      const torch::Tensor& merged, const torch::Tensor& key_heatmaps) const;

    MIObjectiveConfig config_;
    MIEstimator label_fused_{nullptr}, fused_key_{nullptr}, label_merged_{nullptr}, merged_key_{nullptr};
};
TORCH_MODULE(MutualInformationObjective);

struct MILossResult {
    torch::Tensor loss;
    MITerms terms;
};

/// L_MI over one batch; the conditional terms dropped by the simplification
/// are not estimated. Zero weights skip the estimators entirely.
MILossResult mi_loss(const torch::Tensor& gt_heatmaps, const torch::Tensor& fused, const torch::Tensor& key_features,
                     const torch::Tensor& merged, const torch::Tensor& key_heatmaps, const MILossWeights& weights,
                     MutualInformationObjective& objective);

}  // namespace stdpose
