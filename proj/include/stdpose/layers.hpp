// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include <torch/torch.h>

namespace stdpose {

/// softmax(Q K^T / sqrt(D)) V for a single head. Returns the output and the
/// attention weights (rows sum to one).
struct AttentionResult {
    torch::Tensor output;
    torch::Tensor weights;
};

/// Q = Z W_Q, K = F W_K, V = F W_V over token matrices (..., N, D_in).
/// D is the column count of W_Q.
AttentionResult cross_attention(const torch::Tensor& queries, const torch::Tensor& context,
                                const torch::Tensor& w_q, const torch::Tensor& w_k,
                                const torch::Tensor& w_v);

/// Multi-head attention where queries come from one token set and keys and
/// values from another (the same set for self-attention).
class MultiHeadAttentionImpl : public torch::nn::Module {
public:
    MultiHeadAttentionImpl(int64_t embed_dim, int64_t num_heads, int64_t context_dim = 0);

    torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& context);

    /// Attention weights of the last call, (B, heads, Nq, Nk), when enabled.
    void keep_weights(bool enabled) { keep_weights_ = enabled; }
    const torch::Tensor& last_weights() const { return last_weights_; }

private:
    int64_t num_heads_;
    int64_t head_dim_;
    bool keep_weights_ = false;
    torch::Tensor last_weights_;
    torch::nn::Linear q_proj_{nullptr}, k_proj_{nullptr}, v_proj_{nullptr}, out_proj_{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

class FeedForwardImpl : public torch::nn::Module {
public:
    FeedForwardImpl(int64_t dim, int64_t hidden);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(FeedForward);

/// Pre-norm transformer block: x + MHSA(LN(x)), then x + FFN(LN(x)).
class TransformerBlockImpl : public torch::nn::Module {
public:
    TransformerBlockImpl(int64_t dim, int64_t num_heads, double mlp_ratio);
    torch::Tensor forward(const torch::Tensor& x);

    MultiHeadAttention& attention() { return attn_; }

private:
    torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr};
    MultiHeadAttention attn_{nullptr};
    FeedForward ffn_{nullptr};
};
TORCH_MODULE(TransformerBlock);

/// LayerNorm over channels, two (nearest upsample + 3x3 conv + GELU) stages,
/// then a 1x1 conv to the joint channels. The combined upsampling factor
/// must be 1, 2 or 4; a factor of 2 uses an unscaled second stage.
class KeypointHeadImpl : public torch::nn::Module {
public:
    KeypointHeadImpl(int64_t in_channels, int64_t joints, int64_t upsample_factor, int64_t hidden = 0);

    /// (B, C, h, w) -> (B, J, h * factor, w * factor)
    torch::Tensor forward(const torch::Tensor& features);

    /// Multiplies the output projection weights by factor and zeroes its bias.
    void scale_output(double factor);

private:
    std::array<double, 2> stage_scale_{1.0, 1.0};
    torch::nn::LayerNorm norm_{nullptr};
    torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, out_{nullptr};
};
TORCH_MODULE(KeypointHead);

/// (B, C, h, w) <-> (B, h*w, C)
torch::Tensor to_tokens(const torch::Tensor& map);
torch::Tensor from_tokens(const torch::Tensor& tokens, int64_t h, int64_t w);

}  // namespace stdpose
