// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "stdpose/experiments.hpp"

namespace stdpose {

/// Top-level experiment configuration. Every section is optional; missing
/// keys keep their defaults and unknown keys are rejected.
///
///   { "data": {...}, "pretrain_data": {...}, "model": {...}, "flags": {...},
///     "pretrain": {...}, "train": {...}, "estimation_train": {...},
///     "eval": {...}, "seeds": [...] }
struct ExperimentConfig {
    HarnessConfig harness = desk_scale_harness();
    ComponentFlags flags = ComponentFlags::full();

    /// Convenience views.
    const ModelConfig& model() const { return harness.model; }
    const TrainConfig& train() const { return harness.train; }

    Json to_json() const;
};

ExperimentConfig parse_config(const Json& j);

/// Throws InvalidArgument for unreadable files and SchemaError for bad keys.
ExperimentConfig load_config(const std::string& path);

DataConfig data_config_from_json(const Json& j, const std::string& path, DataConfig defaults);

}  // namespace stdpose
