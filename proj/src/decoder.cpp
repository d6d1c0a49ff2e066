// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace stdpose {

void DAMParams::validate() const {
    if (!(k > 0.0)) {
        throw InvalidArgument("modified sigmoid slope k must be positive");
    }
}

void PADecoderConfig::validate() const {
    if (num_pa_blocks < 1) {
        throw InvalidArgument("pose decoder needs at least one aggregation block");
    }
    if (embed_dim % num_heads != 0) {
        throw InvalidArgument("pose decoder embed_dim must be divisible by num_heads");
    }
    if (heatmap_patch_size != 1 && heatmap_patch_size != 2 && heatmap_patch_size != 4) {
        throw InvalidArgument("heatmap patch size must be 1, 2 or 4");
    }
}

double modified_sigmoid(double x, double k, double theta) {
    const double z = std::clamp(-k * (std::abs(x) - theta), -50.0, 50.0);
    return 1.0 / (1.0 + std::exp(z));
}

double modified_sigmoid_derivative(double x, double k, double theta) {
    const double s = modified_sigmoid(x, k, theta);
    const double sign = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    return k * s * (1.0 - s) * sign;
}

torch::Tensor modified_sigmoid(const torch::Tensor& x, double k, double theta) {
    const auto z = torch::clamp(-k * (x.abs() - theta), -50.0, 50.0);
    return 1.0 / (1.0 + torch::exp(z));
}

DynamicAwareMaskImpl::DynamicAwareMaskImpl(int64_t joints, const DAMParams& params) : params_(params) {
    params_.validate();
    auto compress = [&](const char* name) {
        auto conv = register_module(name, torch::nn::Conv2d(torch::nn::Conv2dOptions(joints, 1, 1)));
        torch::NoGradGuard no_grad;
        conv->weight.fill_(1.0);   // starts as a plain sum over joints
        conv->bias.zero_();
        return conv;
    };
    compress_fwd_ = compress("compress_fwd");
    compress_bwd_ = compress("compress_bwd");
    fwd_weight_ = register_parameter("fwd_weight", torch::full({1}, 0.5));
    bwd_weight_ = register_parameter("bwd_weight", torch::full({1}, 0.5));
}

torch::Tensor DynamicAwareMaskImpl::activation(const torch::Tensor& left, const torch::Tensor& key,
                                               const torch::Tensor& right) {
    if (!left.sizes().equals(key.sizes()) || !right.sizes().equals(key.sizes()) || key.dim() != 4) {
        throw InvalidArgument("generate_dam: heatmap stacks must share one (B, J, H, W) shape");
    }
    const auto fwd = modified_sigmoid(key - left, params_.k, params_.theta);
    const auto bwd = modified_sigmoid(right - key, params_.k, params_.theta);
    return fwd_weight_ * compress_fwd_->forward(fwd) + bwd_weight_ * compress_bwd_->forward(bwd);
}

torch::Tensor DynamicAwareMaskImpl::forward(const torch::Tensor& left, const torch::Tensor& key,
                                            const torch::Tensor& right) {
    const auto a = activation(left, key, right);
    return torch::softmax(a.flatten(1), 1).view_as(a);
}

PoseAggregationBlockImpl::PoseAggregationBlockImpl(int64_t dim, int64_t context_dim, int64_t num_heads,
                                                   double mlp_ratio) {
    auto ln = [](int64_t d) { return torch::nn::LayerNorm(torch::nn::LayerNormOptions({d})); };
    norm_self_ = register_module("norm_self", ln(dim));
    norm_query_ = register_module("norm_query", ln(dim));
    norm_context_ = register_module("norm_context", ln(context_dim));
    norm_ffn_ = register_module("norm_ffn", ln(dim));
    self_attn_ = register_module("self_attn", MultiHeadAttention(dim, num_heads));
    cross_attn_ = register_module("cross_attn", MultiHeadAttention(dim, num_heads, context_dim));
    ffn_ = register_module("ffn", FeedForward(dim, static_cast<int64_t>(std::lround(dim * mlp_ratio))));
}

torch::Tensor PoseAggregationBlockImpl::forward(const torch::Tensor& tokens, const torch::Tensor& context) {
    const auto n = norm_self_->forward(tokens);
    auto z = tokens + self_attn_->forward(n, n);
    z = z + cross_attn_->forward(norm_query_->forward(z), norm_context_->forward(context));
    return z + ffn_->forward(norm_ffn_->forward(z));
}

SpatioTemporalAggregatorImpl::SpatioTemporalAggregatorImpl(int64_t joints, int64_t feature_dim, int heatmap_height,
                                                           int heatmap_width, const PADecoderConfig& config)
    : joints_(joints) {
    config.validate();
    const int p = config.heatmap_patch_size;
    if (heatmap_height % p != 0 || heatmap_width % p != 0) {
        throw InvalidArgument("heatmap size is not divisible by the heatmap patch size");
    }
    grid_h_ = heatmap_height / p;
    grid_w_ = heatmap_width / p;
    patch_ = register_module(
        "patch", torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * joints, config.embed_dim, p).stride(p)));
    pos_embed_ = register_parameter("pos_embed", torch::randn({1, grid_h_ * grid_w_, config.embed_dim}) * 0.02);
    blocks_ = register_module("blocks", torch::nn::ModuleList());
    for (int i = 0; i < config.num_pa_blocks; ++i) {
        blocks_->push_back(PoseAggregationBlock(config.embed_dim, feature_dim, config.num_heads, config.mlp_ratio));
    }
    norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({config.embed_dim})));
    head_ = register_module("head", KeypointHead(config.embed_dim, joints, p));
    head_->scale_output(0.01);
}

torch::Tensor SpatioTemporalAggregatorImpl::forward(const torch::Tensor& fused, const torch::Tensor& merged,
                                                    const torch::Tensor& mask) {
    if (merged.dim() != 4 || merged.size(1) != joints_ || fused.dim() != 4 || fused.size(0) != merged.size(0)) {
        throw InvalidArgument("stda_aggregate: expected F~ (B, C, h, w) and H~ (B, J, H, W)");
    }
    if (mask.dim() != 4 || mask.size(1) != 1 || mask.size(0) != merged.size(0) || mask.size(2) != merged.size(2) ||
        mask.size(3) != merged.size(3)) {
        throw InvalidArgument("stda_aggregate: mask must be (B, 1, H, W) matching the heatmaps");
    }
    // rescaled so a uniform mask leaves the heatmaps unchanged
    const double positions = static_cast<double>(merged.size(2) * merged.size(3));
    const auto input = torch::cat({merged * mask * positions, merged}, 1);
    auto tokens = to_tokens(patch_->forward(input));
    if (tokens.size(1) != pos_embed_.size(1)) {
        throw InvalidArgument("stda_aggregate: heatmap size differs from the configured size");
    }
    tokens = tokens + pos_embed_;
    const auto context = to_tokens(fused);
    for (const auto& block : *blocks_) {
        tokens = block->as<PoseAggregationBlock>()->forward(tokens, context);
    }
    return merged + head_->forward(from_tokens(norm_->forward(tokens), grid_h_, grid_w_));
}

DynamicMask generate_dam(const HeatmapStack& left, const HeatmapStack& key, const HeatmapStack& right,
                         DynamicAwareMask& module) {
    if (!left.values.sizes().equals(key.values.sizes()) || !right.values.sizes().equals(key.values.sizes())) {
        throw InvalidArgument("generate_dam: heatmap stacks must share one shape");
    }
    return {module->forward(left.values.unsqueeze(0), key.values.unsqueeze(0), right.values.unsqueeze(0)).squeeze(0)};
}

HeatmapStack stda_aggregate(const FeatureMap& fused, const HeatmapStack& merged, const DynamicMask& mask,
                            SpatioTemporalAggregator& module) {
    return {module->forward(fused.tokens.unsqueeze(0), merged.values.unsqueeze(0), mask.values.unsqueeze(0)).squeeze(0),
            HeatmapOrigin::predicted};
}

torch::Tensor uniform_mask_like(const torch::Tensor& heatmaps) {
    const auto hw = static_cast<double>(heatmaps.size(2) * heatmaps.size(3));
    return torch::full({heatmaps.size(0), 1, heatmaps.size(2), heatmaps.size(3)}, 1.0 / hw, heatmaps.options());
}

}  // namespace stdpose
