// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stdpose/backbone.hpp"

namespace stdpose {

struct DAMParams {
    double k = 1.5;
    double theta = 0.5;

    void validate() const;
};

/// Softmax-normalised spatial mask, (1, H', W').
struct DynamicMask {
    torch::Tensor values;
};

struct PADecoderConfig {
    int num_pa_blocks = 2;
    int embed_dim = 64;
    int num_heads = 4;
    int heatmap_patch_size = 2;
    double mlp_ratio = 4.0;

    void validate() const;
};

/// 1 / (1 + exp(-k (|x| - theta))), exponent clamped to [-50, 50].
double modified_sigmoid(double x, double k, double theta);
/// d/dx of the scalar form (x != 0).
double modified_sigmoid_derivative(double x, double k, double theta);
/// Elementwise, differentiable.
torch::Tensor modified_sigmoid(const torch::Tensor& x, double k, double theta);

/// Dynamic-aware mask from the forward (H_t - H_l) and backward (H_r - H_t)
/// residuals: sigmoid activation, J -> 1 compression per direction, a
/// learned weighted sum of the two, and a softmax over all positions.
class DynamicAwareMaskImpl : public torch::nn::Module {
public:
    DynamicAwareMaskImpl(int64_t joints, const DAMParams& params);

    /// (B, J, H, W) x 3 -> (B, 1, H, W)
    torch::Tensor forward(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right);

    /// Pre-softmax combined activation map, (B, 1, H, W).
    torch::Tensor activation(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right);

    const DAMParams& params() const { return params_; }
    torch::Tensor& forward_weight() { return fwd_weight_; }
    torch::Tensor& backward_weight() { return bwd_weight_; }

private:
    DAMParams params_;
    torch::nn::Conv2d compress_fwd_{nullptr}, compress_bwd_{nullptr};
    torch::Tensor fwd_weight_;
    torch::Tensor bwd_weight_;
};
TORCH_MODULE(DynamicAwareMask);

/// Self-attention over heatmap tokens, cross-attention into the fused
/// features, feed-forward; each pre-normalised with a residual connection.
class PoseAggregationBlockImpl : public torch::nn::Module {
public:
    PoseAggregationBlockImpl(int64_t dim, int64_t context_dim, int64_t num_heads, double mlp_ratio);

    torch::Tensor forward(const torch::Tensor& tokens, const torch::Tensor& context);

    MultiHeadAttention& self_attention() { return self_attn_; }
    MultiHeadAttention& cross_attention() { return cross_attn_; }

private:
    torch::nn::LayerNorm norm_self_{nullptr}, norm_query_{nullptr}, norm_context_{nullptr}, norm_ffn_{nullptr};
    MultiHeadAttention self_attn_{nullptr}, cross_attn_{nullptr};
    FeedForward ffn_{nullptr};
};
TORCH_MODULE(PoseAggregationBlock);

/// Masked heatmaps concatenated with the merged heatmaps are patch-embedded,
/// refined by pose-aggregation blocks against the fused features and decoded
/// by a keypoint head into a correction of H~ at (J, H', W').
class SpatioTemporalAggregatorImpl : public torch::nn::Module {
public:
    SpatioTemporalAggregatorImpl(int64_t joints, int64_t feature_dim, int heatmap_height, int heatmap_width,
                                 const PADecoderConfig& config);

    /// F~ (B, Cf, h, w), H~ (B, J, H, W), M (B, 1, H, W) -> (B, J, H, W)
    torch::Tensor forward(const torch::Tensor& fused, const torch::Tensor& merged, const torch::Tensor& mask);

    torch::nn::ModuleList& blocks() { return blocks_; }

private:
    int64_t joints_;
    int grid_h_;
    int grid_w_;
    torch::nn::Conv2d patch_{nullptr};
    torch::Tensor pos_embed_;
    torch::nn::ModuleList blocks_;
    torch::nn::LayerNorm norm_{nullptr};
    KeypointHead head_{nullptr};
};
TORCH_MODULE(SpatioTemporalAggregator);

DynamicMask generate_dam(const HeatmapStack& left, const HeatmapStack& key, const HeatmapStack& right,
                         DynamicAwareMask& module);
HeatmapStack stda_aggregate(const FeatureMap& fused, const HeatmapStack& merged, const DynamicMask& mask,
                            SpatioTemporalAggregator& module);

/// Mask with every entry 1 / (H * W), used when the dynamic mask is disabled.
torch::Tensor uniform_mask_like(const torch::Tensor& heatmaps);

}  // namespace stdpose
