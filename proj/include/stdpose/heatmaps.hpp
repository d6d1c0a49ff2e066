// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stdpose/core.hpp"

namespace stdpose {

/// Heatmap grid geometry. A joint at input coordinate x lands on heatmap
/// coordinate x / stride; sigma is measured in heatmap pixels.
struct RenderParams {
    int height = 32;
    int width = 24;
    double sigma = 2.0;
    double stride = 4.0;

    void validate() const;
};

/// Joints whose peak response falls below this are decoded as absent.
inline constexpr double kAbsenceThreshold = 0.05;

/// Peak-1 Gaussian per joint; absent joints give all-zero channels.
HeatmapStack render_heatmaps(const Pose& pose, const RenderParams& params);

/// Batched variant over poses: (B, J, H', W').
torch::Tensor render_heatmap_batch(const std::vector<Pose>& poses, const RenderParams& params);

/// Argmax with a quarter-pixel shift toward the larger neighbour. Ties go to
/// the first maximum in row-major order.
Pose decode_heatmaps(const HeatmapStack& stack, const RenderParams& params);

/// Elementwise a - b.
HeatmapStack pose_residual(const HeatmapStack& a, const HeatmapStack& b);

}  // namespace stdpose
