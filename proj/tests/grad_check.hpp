// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <torch/torch.h>

namespace stdpose::testing {

struct GradCheckResult {
    double worst_relative_error = 0.0;
    int checked = 0;
};

/// Compares autograd gradients of a scalar loss with central differences on
/// up to `per_tensor` randomly chosen entries of every tensor. Tensors must be
/// float64 leaves with requires_grad set.
inline GradCheckResult finite_difference_check(const std::function<torch::Tensor()>& loss,
                                               std::vector<torch::Tensor> tensors, int per_tensor, double eps,
                                               std::uint64_t seed) {
    for (auto& t : tensors) {
        if (t.grad().defined()) t.mutable_grad().zero_();
    }
    loss().backward();
    std::mt19937_64 rng(seed);
    GradCheckResult r;
    torch::NoGradGuard no_grad;
    for (auto& t : tensors) {
        auto flat = t.view({-1});
        const auto analytic = t.grad().view({-1}).clone();
        const int64_t n = flat.numel();
        std::uniform_int_distribution<int64_t> pick(0, n - 1);
        for (int i = 0; i < std::min<int64_t>(per_tensor, n); ++i) {
            const int64_t idx = per_tensor >= n ? i : pick(rng);
            const double orig = flat[idx].item<double>();
            flat[idx] = orig + eps;
            const double up = loss().item<double>();
            flat[idx] = orig - eps;
            const double down = loss().item<double>();
            flat[idx] = orig;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[idx].item<double>();
            const double scale = std::max({std::abs(a), std::abs(numeric), 1e-7});
            r.worst_relative_error = std::max(r.worst_relative_error, std::abs(a - numeric) / scale);
            ++r.checked;
        }
    }
    return r;
}

}  // namespace stdpose::testing
