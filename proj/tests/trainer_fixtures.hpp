// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stdpose/trainer.hpp"

namespace stdpose::testing {

inline ModelConfig tiny_model() {
    ModelConfig c;
    c.crop_height = 64;
    c.crop_width = 48;
    return c;
}

inline DataConfig tiny_data(int train = 2, int val = 1, std::uint64_t seed = 5) {
    DataConfig d;
    d.num_train_videos = train;
    d.num_val_videos = val;
    d.scene.num_frames = 12;
    d.scene.image_height = 96;
    d.scene.image_width = 96;
    d.scene.seed = seed;
    return d;
}

inline TrainConfig tiny_train(TrainMode mode = TrainMode::propagation) {
    TrainConfig c;
    c.mode = mode;
    c.epochs = 1;
    c.decay_epochs = {};
    c.batch_size = 4;
    c.samples_per_video = 4;
    c.interval = 4;
    c.seed = 3;
    return c;
}

/// The first n labeled key frames of the training split, unaugmented.
inline std::vector<TrainingSample> fixed_samples(const Dataset& ds, int n, TrainMode mode, int interval,
                                                 const ModelConfig& m) {
    std::vector<TrainingSample> out;
    for (const auto& r : ds.train) {
        for (int t = 0; t < r.video.num_frames() && static_cast<int>(out.size()) < n; ++t) {
            out.push_back(make_sample(r, t, mode, interval, {m.crop_height, m.crop_width}));
        }
    }
    return out;
}

}  // namespace stdpose::testing
