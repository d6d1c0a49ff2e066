// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/backbone.hpp"

namespace stdpose {

void BackboneConfig::validate() const {
    if (patch_size <= 0 || embed_dim <= 0 || depth < 0 || num_heads <= 0 || !(mlp_ratio > 0.0)) {
        throw InvalidArgument("backbone sizes must be positive");
    }
    if (embed_dim % num_heads != 0) {
        throw InvalidArgument("backbone embed_dim must be divisible by num_heads");
    }
}

SpatialEncoderImpl::SpatialEncoderImpl(const BackboneConfig& config, int image_height, int image_width)
    : config_(config) {
    config_.validate();
    if (image_height % config.patch_size != 0 || image_width % config.patch_size != 0) {
        throw InvalidArgument("image size " + std::to_string(image_height) + "x" + std::to_string(image_width) +
                              " is not divisible by patch size " + std::to_string(config.patch_size));
    }
    grid_h_ = image_height / config.patch_size;
    grid_w_ = image_width / config.patch_size;
    patch_ = register_module(
        "patch", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, config.embed_dim, config.patch_size)
                                       .stride(config.patch_size)));
    pos_embed_ = register_parameter("pos_embed", torch::randn({1, grid_h_ * grid_w_, config.embed_dim}) * 0.02);
    blocks_ = register_module("blocks", torch::nn::ModuleList());
    for (int i = 0; i < config.depth; ++i) {
        blocks_->push_back(TransformerBlock(config.embed_dim, config.num_heads, config.mlp_ratio));
    }
    norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({config.embed_dim})));
}

torch::Tensor SpatialEncoderImpl::forward(const torch::Tensor& images) {
    if (images.dim() != 4 || images.size(1) != 3) {
        throw InvalidArgument("encoder expects (B, 3, H, W) images");
    }
    if (images.size(2) != grid_h_ * config_.patch_size || images.size(3) != grid_w_ * config_.patch_size) {
        throw InvalidArgument("image size does not match the encoder's configured input size");
    }
    auto x = to_tokens(patch_->forward(images - 0.5)) + pos_embed_;
    for (const auto& block : *blocks_) {
        x = block->as<TransformerBlock>()->forward(x);
    }
    return from_tokens(norm_->forward(x), grid_h_, grid_w_);
}

FeatureMap encode_frame(const torch::Tensor& image, SpatialEncoder& encoder) {
    if (image.dim() != 3) {
        throw InvalidArgument("encode_frame expects a (3, H, W) raster");
    }
    const int p = encoder->config().patch_size;
    if (image.size(1) % p != 0 || image.size(2) % p != 0) {
        throw InvalidArgument("image dims must be divisible by patch_size");
    }
    return {encoder->forward(image.unsqueeze(0)).squeeze(0)};
}

HeatmapStack head_heatmaps(const FeatureMap& feature, KeypointHead& head) {
    return {head->forward(feature.tokens.unsqueeze(0)).squeeze(0), HeatmapOrigin::predicted};
}

int64_t parameter_count(const torch::nn::Module& module) {
    int64_t n = 0;
    for (const auto& p : module.parameters()) {
        n += p.numel();
    }
    return n;
}

}  // namespace stdpose
