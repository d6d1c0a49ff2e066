// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/heatmaps.hpp"

#include <cmath>

namespace stdpose {

void RenderParams::validate() const {
    if (height <= 0 || width <= 0) {
        throw InvalidArgument("heatmap resolution must be positive");
    }
    if (!(sigma > 0.0)) {
        throw InvalidArgument("heatmap sigma must be positive");
    }
    if (!(stride > 0.0)) {
        throw InvalidArgument("heatmap stride must be positive");
    }
}

namespace {

void render_into(const Pose& pose, const RenderParams& params, float* out) {
    const double inv_two_sigma_sq = 1.0 / (2.0 * params.sigma * params.sigma);
    const auto plane = static_cast<std::ptrdiff_t>(params.height) * params.width;
    for (int j = 0; j < pose.size(); ++j) {
        float* channel = out + j * plane;
        if (!pose.present(j)) {
            continue;
        }
        const double u = pose.coords[static_cast<std::size_t>(j)].x / params.stride;
        const double v = pose.coords[static_cast<std::size_t>(j)].y / params.stride;
        for (int row = 0; row < params.height; ++row) {
            const double dy = row - v;
            for (int col = 0; col < params.width; ++col) {
                const double dx = col - u;
                channel[row * params.width + col] =
                    static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq));
            }
        }
    }
}

}  // namespace

HeatmapStack render_heatmaps(const Pose& pose, const RenderParams& params) {
    params.validate();
    auto values = torch::zeros({pose.size(), params.height, params.width}, torch::kFloat32);
    render_into(pose, params, values.data_ptr<float>());
    return {values, HeatmapOrigin::rendered};
}

torch::Tensor render_heatmap_batch(const std::vector<Pose>& poses, const RenderParams& params) {
    params.validate();
    if (poses.empty()) {
        throw InvalidArgument("render_heatmap_batch needs at least one pose");
    }
    const int joints = poses.front().size();
    auto values = torch::zeros({static_cast<long>(poses.size()), joints, params.height, params.width},
                               torch::kFloat32);
    const auto per_sample = static_cast<std::ptrdiff_t>(joints) * params.height * params.width;
    for (std::size_t b = 0; b < poses.size(); ++b) {
        if (poses[b].size() != joints) {
            throw InvalidArgument("poses in a batch must share a joint count");
        }
        render_into(poses[b], params, values.data_ptr<float>() + static_cast<std::ptrdiff_t>(b) * per_sample);
    }
    return values;
}

Pose decode_heatmaps(const HeatmapStack& stack, const RenderParams& params) {
    auto values = stack.values.detach().to(torch::kFloat32).contiguous();
    TORCH_CHECK(values.dim() == 3, "decode_heatmaps expects (J, H, W)");
    const int joints = static_cast<int>(values.size(0));
    const int h = static_cast<int>(values.size(1));
    const int w = static_cast<int>(values.size(2));
    const float* data = values.data_ptr<float>();

    Pose pose(joints);
    for (int j = 0; j < joints; ++j) {
        const float* ch = data + static_cast<std::ptrdiff_t>(j) * h * w;
        int best = 0;
        for (int i = 1; i < h * w; ++i) {
            if (ch[i] > ch[best]) {
                best = i;
            }
        }
        const int row = best / w;
        const int col = best % w;
        double x = col;
        double y = row;
        if (col > 0 && col < w - 1) {
            const float diff = ch[best + 1] - ch[best - 1];
            x += diff > 0 ? 0.25 : (diff < 0 ? -0.25 : 0.0);
        }
        if (row > 0 && row < h - 1) {
            const float diff = ch[best + w] - ch[best - w];
            y += diff > 0 ? 0.25 : (diff < 0 ? -0.25 : 0.0);
        }
        pose.coords[static_cast<std::size_t>(j)] = {x * params.stride, y * params.stride};
        pose.visibility[static_cast<std::size_t>(j)] =
            ch[best] < kAbsenceThreshold ? Visibility::absent : Visibility::visible;
    }
    return pose;
}

HeatmapStack pose_residual(const HeatmapStack& a, const HeatmapStack& b) {
    if (!a.values.sizes().equals(b.values.sizes())) {
        throw InvalidArgument("pose_residual: heatmap shapes differ");
    }
    return {a.values - b.values, HeatmapOrigin::residual};
}

}  // namespace stdpose
