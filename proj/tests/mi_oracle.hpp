// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include <torch/torch.h>

#include "stdpose/miobj.hpp"

namespace stdpose::testing {

inline double gaussian_mi(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

struct PairedSamples {
    torch::Tensor x, y;
};

inline PairedSamples correlated_gaussians(double rho, int64_t n, std::uint64_t seed) {
    auto gen = at::detail::createCPUGenerator(seed);
    const auto a = torch::randn({n, 1}, gen);
    const auto b = torch::randn({n, 1}, gen);
    return {a, rho * a + std::sqrt(1.0 - rho * rho) * b};
}

inline PairedSamples copied_one_hot(int symbols, int64_t n, std::uint64_t seed) {
    auto gen = at::detail::createCPUGenerator(seed);
    const auto idx = torch::randint(symbols, {n}, gen, torch::TensorOptions().dtype(torch::kLong));
    const auto x = torch::one_hot(idx, symbols).to(torch::kFloat32);
    return {x, x.clone()};
}

/// Fits a fresh estimator on the samples and evaluates the bound on an
/// independent draw from the same source. Raw inputs, no projection.
template <typename Source>
double fitted_estimate(Source source, int64_t dim, std::uint64_t seed, int steps = 3000) {
    torch::manual_seed(seed);
    MIEstimatorConfig cfg;
    cfg.x_dim = dim;
    cfg.y_dim = dim;
    cfg.proj_dim = 0;
    cfg.seed = seed;
    MIEstimator est(cfg);
    const auto train = source(10000, seed * 2 + 1);
    fit_estimator(train.x, train.y, est, steps, 512, 1e-3, seed);
    const auto held_out = source(10000, seed * 2 + 2);
    torch::NoGradGuard ng;
    return estimate_mi(held_out.x, held_out.y, est).template item<double>();
}

}  // namespace stdpose::testing
