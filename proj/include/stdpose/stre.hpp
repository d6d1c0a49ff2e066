// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stdpose/backbone.hpp"

namespace stdpose {

struct TFFConfig {
    int num_blocks = 2;
    int num_heads = 4;
    double mlp_ratio = 4.0;

    void validate() const;
};

struct TKSConfig {
    int temporal_merge_channels = 1;   // per-joint hidden width of the temporal merge
    int spatial_merge_channels = 15;
    int kernel_size = 3;

    void validate() const;
};

/// Temporal feature fusion over the (left, key, right) token maps.
///
/// Each map gets its frame-slot embedding, the three token sets are
/// concatenated and run through transformer blocks, then the three slot
/// tokens at every spatial location are mapped back to one token by an MLP.
class TemporalFeatureFusionImpl : public torch::nn::Module {
public:
    TemporalFeatureFusionImpl(int64_t embed_dim, const TFFConfig& config);

    /// (B, C, h, w) x 3 -> (B, C, h, w)
    torch::Tensor forward(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right);

    torch::Tensor& slot_embedding() { return slot_embed_; }

private:
    torch::Tensor slot_embed_;   // (3, C)
    torch::nn::ModuleList blocks_;
    torch::nn::Linear agg1_{nullptr}, agg2_{nullptr};
};
TORCH_MODULE(TemporalFeatureFusion);

/// Temporal keypoint synthesis: per-joint temporal merge, cross-joint spatial
/// merge, then a final block over the merged maps concatenated with the
/// three input stacks, added to the key heatmaps.
class TemporalKeypointSynthesisImpl : public torch::nn::Module {
public:
    TemporalKeypointSynthesisImpl(int64_t joints, const TKSConfig& config);

    /// (B, J, H, W) x 3 -> (B, J, H, W)
    torch::Tensor forward(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right);

    /// Output of the per-joint stage only, (B, J, H, W).
    torch::Tensor temporal_merge(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right);

private:
    int64_t joints_;
    torch::nn::Sequential temporal_{nullptr};
    torch::nn::Sequential spatial_{nullptr};
    torch::nn::Sequential fuse_{nullptr};
};
TORCH_MODULE(TemporalKeypointSynthesis);

FeatureMap tff_fuse(const FeatureMap& left, const FeatureMap& key, const FeatureMap& right,
                    TemporalFeatureFusion& module);
HeatmapStack tks_synthesize(const HeatmapStack& left, const HeatmapStack& key, const HeatmapStack& right,
                            TemporalKeypointSynthesis& module);

}  // namespace stdpose
