// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stdpose/core.hpp"
#include "stdpose/layers.hpp"

namespace stdpose {

struct BackboneConfig {
    int patch_size = 8;
    int embed_dim = 64;
    int depth = 4;
    int num_heads = 4;
    double mlp_ratio = 4.0;

    void validate() const;
};

/// Token grid of one frame, (embed_dim, h_tokens, w_tokens).
struct FeatureMap {
    torch::Tensor tokens;
};

/// ViT-style encoder: patch projection, learned 2-D position embedding,
/// pre-norm transformer blocks, final LayerNorm. Output keeps the token grid.
class SpatialEncoderImpl : public torch::nn::Module {
public:
    SpatialEncoderImpl(const BackboneConfig& config, int image_height, int image_width);

    /// (B, 3, H, W) -> (B, C, H/p, W/p)
    torch::Tensor forward(const torch::Tensor& images);

    const BackboneConfig& config() const { return config_; }
    int grid_height() const { return grid_h_; }
    int grid_width() const { return grid_w_; }

private:
    BackboneConfig config_;
    int grid_h_;
    int grid_w_;
    torch::nn::Conv2d patch_{nullptr};
    torch::Tensor pos_embed_;
    torch::nn::ModuleList blocks_;
    torch::nn::LayerNorm norm_{nullptr};
};
TORCH_MODULE(SpatialEncoder);

/// Single-frame wrappers over the batched modules.
FeatureMap encode_frame(const torch::Tensor& image, SpatialEncoder& encoder);
HeatmapStack head_heatmaps(const FeatureMap& feature, KeypointHead& head);

int64_t parameter_count(const torch::nn::Module& module);

}  // namespace stdpose
