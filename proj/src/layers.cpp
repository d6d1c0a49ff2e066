// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/layers.hpp"

#include <cmath>

#include "stdpose/errors.hpp"

namespace stdpose {

namespace F = torch::nn::functional;

AttentionResult cross_attention(const torch::Tensor& queries, const torch::Tensor& context,
                                const torch::Tensor& w_q, const torch::Tensor& w_k,
                                const torch::Tensor& w_v) {
    if (queries.size(-1) != w_q.size(0) || context.size(-1) != w_k.size(0) || context.size(-1) != w_v.size(0)) {
        throw InvalidArgument("cross_attention: input width does not match projection rows");
    }
    if (w_q.size(1) != w_k.size(1)) {
        throw InvalidArgument("cross_attention: query and key projections differ in width");
    }
    const auto q = torch::matmul(queries, w_q);
    const auto k = torch::matmul(context, w_k);
    const auto v = torch::matmul(context, w_v);
    const double scale = 1.0 / std::sqrt(static_cast<double>(w_q.size(1)));
    auto weights = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) * scale, -1);
    return {torch::matmul(weights, v), weights};
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int64_t embed_dim, int64_t num_heads, int64_t context_dim)
    : num_heads_(num_heads), head_dim_(embed_dim / num_heads) {
    if (num_heads <= 0 || embed_dim % num_heads != 0) {
        throw InvalidArgument("embed_dim must be divisible by num_heads");
    }
    const int64_t kv_in = context_dim > 0 ? context_dim : embed_dim;
    q_proj_ = register_module("q_proj", torch::nn::Linear(embed_dim, embed_dim));
    k_proj_ = register_module("k_proj", torch::nn::Linear(kv_in, embed_dim));
    v_proj_ = register_module("v_proj", torch::nn::Linear(kv_in, embed_dim));
    out_proj_ = register_module("out_proj", torch::nn::Linear(embed_dim, embed_dim));
}

torch::Tensor MultiHeadAttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& context) {
    const auto B = query.size(0);
    const auto Nq = query.size(1);
    const auto Nk = context.size(1);
    auto split = [&](const torch::Tensor& x, int64_t n) {
        return x.view({B, n, num_heads_, head_dim_}).transpose(1, 2);
    };
    const auto q = split(q_proj_->forward(query), Nq);
    const auto k = split(k_proj_->forward(context), Nk);
    const auto v = split(v_proj_->forward(context), Nk);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
    auto weights = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) * scale, -1);
    if (keep_weights_) {
        last_weights_ = weights.detach();
    }
    auto out = torch::matmul(weights, v).transpose(1, 2).reshape({B, Nq, num_heads_ * head_dim_});
    return out_proj_->forward(out);
}

FeedForwardImpl::FeedForwardImpl(int64_t dim, int64_t hidden)
    : fc1_(register_module("fc1", torch::nn::Linear(dim, hidden))),
      fc2_(register_module("fc2", torch::nn::Linear(hidden, dim))) {}

torch::Tensor FeedForwardImpl::forward(const torch::Tensor& x) {
    return fc2_->forward(F::gelu(fc1_->forward(x)));
}

TransformerBlockImpl::TransformerBlockImpl(int64_t dim, int64_t num_heads, double mlp_ratio)
    : norm1_(register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})))),
      norm2_(register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})))),
      attn_(register_module("attn", MultiHeadAttention(dim, num_heads))),
      ffn_(register_module("ffn", FeedForward(dim, static_cast<int64_t>(std::lround(dim * mlp_ratio))))) {}

torch::Tensor TransformerBlockImpl::forward(const torch::Tensor& x) {
    const auto n = norm1_->forward(x);
    auto y = x + attn_->forward(n, n);
    return y + ffn_->forward(norm2_->forward(y));
}

KeypointHeadImpl::KeypointHeadImpl(int64_t in_channels, int64_t joints, int64_t upsample_factor, int64_t hidden) {
    if (upsample_factor != 1 && upsample_factor != 2 && upsample_factor != 4) {
        throw InvalidArgument("keypoint head upsampling factor must be 1, 2 or 4");
    }
    if (hidden <= 0) {
        hidden = in_channels;
    }
    stage_scale_ = {upsample_factor >= 2 ? 2.0 : 1.0, upsample_factor == 4 ? 2.0 : 1.0};
    auto conv3 = [](int64_t in, int64_t out) {
        // replicate padding keeps a constant input constant at the borders
        return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1).padding_mode(torch::kReplicate));
    };
    norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({in_channels})));
    conv1_ = register_module("conv1", conv3(in_channels, hidden));
    conv2_ = register_module("conv2", conv3(hidden, hidden));
    out_ = register_module("out", torch::nn::Conv2d(torch::nn::Conv2dOptions(hidden, joints, 1)));
}

torch::Tensor KeypointHeadImpl::forward(const torch::Tensor& features) {
    auto x = norm_->forward(features.permute({0, 2, 3, 1})).permute({0, 3, 1, 2});
    for (int stage = 0; stage < 2; ++stage) {
        const double s = stage_scale_[static_cast<std::size_t>(stage)];
        if (s != 1.0) {
            x = F::interpolate(x, F::InterpolateFuncOptions()
                                      .scale_factor(std::vector<double>{s, s})
                                      .mode(torch::kNearest));
        }
        x = F::gelu(stage == 0 ? conv1_->forward(x) : conv2_->forward(x));
    }
    return out_->forward(x);
}

void KeypointHeadImpl::scale_output(double factor) {
    torch::NoGradGuard ng;
    out_->weight.mul_(factor);
    out_->bias.zero_();
}

torch::Tensor to_tokens(const torch::Tensor& map) {
    return map.flatten(2).transpose(1, 2);
}

torch::Tensor from_tokens(const torch::Tensor& tokens, int64_t h, int64_t w) {
    return tokens.transpose(1, 2).reshape({tokens.size(0), tokens.size(2), h, w});
}

}  // namespace stdpose
