// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "grad_check.hpp"
#include "stdpose/backbone.hpp"
#include "stdpose/heatmaps.hpp"

using namespace stdpose;

TEST(CrossAttention, RowsSumToOne) {
    torch::manual_seed(0);
    for (int i = 0; i < 20; ++i) {
        const auto z = torch::randn({7, 16});
        const auto f = torch::randn({11, 12});
        const auto r = cross_attention(z, f, torch::randn({16, 8}), torch::randn({12, 8}), torch::randn({12, 5}));
        ASSERT_EQ(r.output.sizes(), (std::vector<int64_t>{7, 5}));
        ASSERT_TRUE(torch::allclose(r.weights.sum(-1), torch::ones({7}), 0.0, 1e-6));
    }
}

TEST(CrossAttention, IdenticalKeysGiveUniformWeights) {
    const auto z = torch::randn({4, 6});
    const auto f = torch::randn({1, 6}).expand({9, 6}).contiguous();
    const auto w_v = torch::randn({6, 3});
    const auto r = cross_attention(z, f, torch::randn({6, 4}), torch::randn({6, 4}), w_v);
    EXPECT_TRUE(torch::allclose(r.weights, torch::full({4, 9}, 1.0 / 9.0), 0.0, 1e-6));
    const auto v = torch::matmul(f, w_v);
    for (int i = 0; i < 4; ++i) {
        EXPECT_TRUE(torch::allclose(r.output[i], v[0], 1e-4, 1e-5));
    }
}

TEST(CrossAttention, SaturatesOnDominantKey) {
    const int64_t n = 6;
    auto f = torch::eye(n);
    auto z = torch::zeros({1, n});
    z.index_put_({0, 2}, 1.0);
    const auto w_q = torch::eye(n) * 100.0;
    const auto w_k = torch::eye(n) * 100.0;
    const auto w_v = torch::randn({n, 3});
    const auto r = cross_attention(z, f, w_q, w_k, w_v);
    EXPECT_TRUE(torch::allclose(r.output[0], w_v[2], 1e-5, 1e-5));
}

TEST(CrossAttention, DimensionMismatchThrows) {
    EXPECT_THROW(cross_attention(torch::randn({3, 4}), torch::randn({5, 6}), torch::randn({5, 2}), torch::randn({6, 2}),
                                 torch::randn({6, 2})),
                 InvalidArgument);
    EXPECT_THROW(cross_attention(torch::randn({3, 4}), torch::randn({5, 6}), torch::randn({4, 2}), torch::randn({6, 3}),
                                 torch::randn({6, 2})),
                 InvalidArgument);
}

TEST(MultiHeadAttention, WeightRowsSumToOne) {
    torch::manual_seed(1);
    MultiHeadAttention mha(32, 4, 16);
    mha->keep_weights(true);
    const auto out = mha->forward(torch::randn({2, 10, 32}), torch::randn({2, 7, 16}));
    EXPECT_EQ(out.sizes(), (std::vector<int64_t>{2, 10, 32}));
    const auto& w = mha->last_weights();
    EXPECT_EQ(w.sizes(), (std::vector<int64_t>{2, 4, 10, 7}));
    EXPECT_TRUE(torch::allclose(w.sum(-1), torch::ones({2, 4, 10}), 0.0, 1e-6));
}

TEST(SpatialEncoder, ShapeContract) {
    torch::manual_seed(0);
    SpatialEncoder enc(BackboneConfig{}, 128, 96);
    const auto f = encode_frame(torch::rand({3, 128, 96}), enc);
    EXPECT_EQ(f.tokens.sizes(), (std::vector<int64_t>{64, 16, 12}));
    EXPECT_TRUE(torch::isfinite(f.tokens).all().item<bool>());
}

TEST(SpatialEncoder, RejectsIndivisibleInput) {
    EXPECT_THROW(SpatialEncoder(BackboneConfig{}, 100, 96), InvalidArgument);
    SpatialEncoder enc(BackboneConfig{}, 128, 96);
    EXPECT_THROW(encode_frame(torch::rand({3, 124, 96}), enc), InvalidArgument);
    BackboneConfig bad;
    bad.num_heads = 5;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SpatialEncoder, DeterministicAndBatchOrderIndependent) {
    torch::manual_seed(0);
    SpatialEncoder enc(BackboneConfig{}, 64, 48);
    enc->eval();
    torch::NoGradGuard ng;
    const auto images = torch::rand({4, 3, 64, 48});
    const auto batch = enc->forward(images);
    for (int i = 0; i < 4; ++i) {
        const auto alone = encode_frame(images[i], enc).tokens;
        EXPECT_TRUE(torch::allclose(alone, batch[i], 1e-5, 1e-5));
        EXPECT_TRUE(torch::equal(alone, encode_frame(images[i], enc).tokens));
    }
    const auto reversed = enc->forward(images.flip(0));
    EXPECT_TRUE(torch::allclose(reversed.flip(0), batch, 1e-5, 1e-5));
}

TEST(SpatialEncoder, SinglePatchPerturbationChangesTokens) {
    torch::manual_seed(0);
    SpatialEncoder enc(BackboneConfig{}, 64, 48);
    torch::NoGradGuard ng;
    const auto a = torch::rand({3, 64, 48});
    auto b = a.clone();
    b.index_put_({torch::indexing::Slice(), torch::indexing::Slice(8, 16), torch::indexing::Slice(16, 24)},
                 torch::rand({3, 8, 8}));
    EXPECT_FALSE(torch::allclose(encode_frame(a, enc).tokens, encode_frame(b, enc).tokens));
}

TEST(SpatialEncoder, ParameterCountMatchesFormula) {
    for (const auto& [patch, dim, depth, heads, H, W] :
         std::vector<std::tuple<int, int, int, int, int, int>>{{8, 64, 4, 4, 128, 96}, {4, 32, 2, 2, 32, 24},
                                                               {16, 48, 3, 3, 64, 64}}) {
        BackboneConfig c;
        c.patch_size = patch;
        c.embed_dim = dim;
        c.depth = depth;
        c.num_heads = heads;
        c.mlp_ratio = 4.0;
        SpatialEncoder enc(c, H, W);
        const int64_t C = dim, hidden = 4 * dim, N = (H / patch) * (W / patch);
        const int64_t block = 2 * (2 * C) + 4 * (C * C + C) + (C * hidden + hidden) + (hidden * C + C);
        const int64_t expected = (3 * patch * patch * C + C) + N * C + depth * block + 2 * C;
        EXPECT_EQ(parameter_count(*enc), expected);
    }
}

TEST(KeypointHead, ShapeAndParameterCount) {
    KeypointHead head(64, 15, 2);
    const auto h = head_heatmaps({torch::randn({64, 16, 12})}, head);
    EXPECT_EQ(h.values.sizes(), (std::vector<int64_t>{15, 32, 24}));
    const int64_t C = 64;
    EXPECT_EQ(parameter_count(*head), 2 * C + (C * C * 9 + C) + (C * C * 9 + C) + (C * 15 + 15));
    KeypointHead four(16, 15, 4);
    EXPECT_EQ(four->forward(torch::randn({1, 16, 4, 3})).sizes(), (std::vector<int64_t>{1, 15, 16, 12}));
    KeypointHead one(16, 15, 1);
    EXPECT_EQ(one->forward(torch::randn({1, 16, 4, 3})).sizes(), (std::vector<int64_t>{1, 15, 4, 3}));
    EXPECT_THROW(KeypointHead(16, 15, 3), InvalidArgument);
}

TEST(KeypointHead, ZeroInputGivesSpatiallyConstantOutput) {
    torch::manual_seed(3);
    KeypointHead head(32, 15, 2);
    torch::NoGradGuard ng;
    const auto out = head->forward(torch::zeros({1, 32, 8, 6}));
    const auto first = out.index({0, torch::indexing::Slice(), 0, 0}).view({15, 1, 1});
    EXPECT_TRUE(torch::allclose(out[0], first.expand({15, 16, 12}), 0.0, 1e-6));
}

TEST(KeypointHead, GradientsMatchFiniteDifferences) {
    torch::manual_seed(7);
    BackboneConfig c;
    c.patch_size = 8;
    c.embed_dim = 16;
    c.depth = 1;
    c.num_heads = 2;
    SpatialEncoder enc(c, 16, 16);
    KeypointHead head(16, 3, 2);
    enc->to(torch::kFloat64);
    head->to(torch::kFloat64);
    const auto x = torch::rand({1, 3, 16, 16}, torch::kFloat64);
    Pose p(3);
    p.coords = {{3.0, 5.0}, {9.5, 12.0}, {14.0, 2.0}};
    RenderParams rp;
    rp.height = 4;
    rp.width = 4;
    rp.sigma = 1.0;
    const auto g = render_heatmap_batch({p}, rp).to(torch::kFloat64);
    const auto feat = enc->forward(x).detach();
    auto loss = [&] { return (head->forward(feat) - g).square().mean(); };
    const auto r = stdpose::testing::finite_difference_check(loss, head->parameters(), 25, 1e-6, 11);
    EXPECT_GT(r.checked, 100);
    EXPECT_LT(r.worst_relative_error, 1e-3);
}

TEST(Tokens, RoundTrip) {
    const auto m = torch::randn({2, 5, 3, 4});
    const auto t = to_tokens(m);
    EXPECT_EQ(t.sizes(), (std::vector<int64_t>{2, 12, 5}));
    EXPECT_TRUE(torch::equal(from_tokens(t, 3, 4), m));
}
