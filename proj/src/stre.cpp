// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/stre.hpp"

namespace stdpose {

namespace F = torch::nn::functional;

void TFFConfig::validate() const {
    if (num_blocks < 1) {
        throw InvalidArgument("TFF needs at least one block");
    }
    if (num_heads < 1) {
        throw InvalidArgument("TFF num_heads must be positive");
    }
}

void TKSConfig::validate() const {
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw InvalidArgument("TKS kernel size must be odd");
    }
    if (temporal_merge_channels < 1 || spatial_merge_channels < 1) {
        throw InvalidArgument("TKS channel widths must be positive");
    }
}

TemporalFeatureFusionImpl::TemporalFeatureFusionImpl(int64_t embed_dim, const TFFConfig& config) {
    config.validate();
    slot_embed_ = register_parameter("slot_embed", torch::randn({3, embed_dim}) * 0.02);
    blocks_ = register_module("blocks", torch::nn::ModuleList());
    for (int i = 0; i < config.num_blocks; ++i) {
        blocks_->push_back(TransformerBlock(embed_dim, config.num_heads, config.mlp_ratio));
    }
    agg1_ = register_module("agg1", torch::nn::Linear(3 * embed_dim, embed_dim));
    agg2_ = register_module("agg2", torch::nn::Linear(embed_dim, embed_dim));
}

torch::Tensor TemporalFeatureFusionImpl::forward(const torch::Tensor& left, const torch::Tensor& key,
                                                 const torch::Tensor& right) {
    if (!left.sizes().equals(key.sizes()) || !right.sizes().equals(key.sizes()) || key.dim() != 4) {
        throw InvalidArgument("tff_fuse: feature maps must share one (B, C, h, w) shape");
    }
    const auto B = key.size(0);
    const auto C = key.size(1);
    const auto h = key.size(2);
    const auto w = key.size(3);
    const auto n = h * w;
    auto x = torch::cat({to_tokens(left) + slot_embed_[0], to_tokens(key) + slot_embed_[1],
                         to_tokens(right) + slot_embed_[2]},
                        1);
    for (const auto& block : *blocks_) {
        x = block->as<TransformerBlock>()->forward(x);
    }
    // (B, 3N, C) -> (B, N, 3C): the three temporal slots of each location side by side
    x = x.view({B, 3, n, C}).permute({0, 2, 1, 3}).reshape({B, n, 3 * C});
    x = agg2_->forward(F::gelu(agg1_->forward(x)));
    return from_tokens(x, h, w);
}

namespace {

torch::nn::Sequential conv_block(int64_t in, int64_t out, int64_t kernel, int64_t groups, bool activate) {
    torch::nn::Sequential seq;
    seq->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel).padding(kernel / 2).groups(groups)));
    if (activate) {
        seq->push_back(torch::nn::GroupNorm(torch::nn::GroupNormOptions(groups, out)));
        seq->push_back(torch::nn::GELU());
    }
    return seq;
}

torch::nn::Sequential stack(torch::nn::Sequential a, torch::nn::Sequential b) {
    torch::nn::Sequential seq;
    for (const auto& m : *a) seq->push_back(m);
    for (const auto& m : *b) seq->push_back(m);
    return seq;
}

}  // namespace

TemporalKeypointSynthesisImpl::TemporalKeypointSynthesisImpl(int64_t joints, const TKSConfig& config)
    : joints_(joints) {
    config.validate();
    const int64_t k = config.kernel_size;
    const int64_t m = config.temporal_merge_channels;
    const int64_t s = config.spatial_merge_channels;
    // grouped convolutions keep every joint's temporal merge independent
    temporal_ = register_module("temporal", stack(conv_block(3 * joints, m * joints, k, joints, true),
                                                   conv_block(m * joints, joints, k, joints, true)));
    spatial_ = register_module("spatial", stack(conv_block(joints, s, k, 1, true), conv_block(s, joints, k, 1, true)));
    fuse_ = register_module("fuse", stack(conv_block(4 * joints, joints, k, 1, true), conv_block(joints, joints, k, 1, false)));
    // the synthesis is a correction on the key heatmaps; start it near zero
    torch::NoGradGuard ng;
    auto* last = fuse_->ptr(fuse_->size() - 1)->as<torch::nn::Conv2d>();
    last->weight.mul_(0.01);
    last->bias.zero_();
}

torch::Tensor TemporalKeypointSynthesisImpl::temporal_merge(const torch::Tensor& left, const torch::Tensor& key,
                                                            const torch::Tensor& right) {
    if (!left.sizes().equals(key.sizes()) || !right.sizes().equals(key.sizes()) || key.dim() != 4 ||
        key.size(1) != joints_) {
        throw InvalidArgument("tks_synthesize: heatmap stacks must share one (B, J, H, W) shape");
    }
    // channel order l_0, t_0, r_0, l_1, ... so each group sees one joint over time
    auto per_joint = torch::stack({left, key, right}, 2).flatten(1, 2);
    return temporal_->forward(per_joint);
}

torch::Tensor TemporalKeypointSynthesisImpl::forward(const torch::Tensor& left, const torch::Tensor& key,
                                                     const torch::Tensor& right) {
    auto merged = temporal_merge(left, key, right);
    auto spatial = spatial_->forward(merged);
    return key + fuse_->forward(torch::cat({spatial, left, key, right}, 1));
}

FeatureMap tff_fuse(const FeatureMap& left, const FeatureMap& key, const FeatureMap& right,
                    TemporalFeatureFusion& module) {
    if (!left.tokens.sizes().equals(key.tokens.sizes()) || !right.tokens.sizes().equals(key.tokens.sizes())) {
        throw InvalidArgument("tff_fuse: feature maps must share one shape");
    }
    return {module->forward(left.tokens.unsqueeze(0), key.tokens.unsqueeze(0), right.tokens.unsqueeze(0)).squeeze(0)};
}

HeatmapStack tks_synthesize(const HeatmapStack& left, const HeatmapStack& key, const HeatmapStack& right,
                            TemporalKeypointSynthesis& module) {
    if (!left.values.sizes().equals(key.values.sizes()) || !right.values.sizes().equals(key.values.sizes())) {
        throw InvalidArgument("tks_synthesize: heatmap stacks must share one shape");
    }
    return {module->forward(left.values.unsqueeze(0), key.values.unsqueeze(0), right.values.unsqueeze(0)).squeeze(0),
            HeatmapOrigin::merged};
}

}  // namespace stdpose
