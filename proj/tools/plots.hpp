// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace stdpose::plots {

/// Renders a results file to a PNG. Understands the JSON written by the sweep
/// commands (t_sweep, ablation, sigmoid_sweep, propagation_vs_estimation,
/// pseudo_label) and JSONL training metrics logs. Never modifies the input.
void render_file(const std::string& input_path, const std::string& output_path);

}  // namespace stdpose::plots
