// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>

#include "stdpose/trainer.hpp"

namespace stdpose {

/// Maps a batch of triplets of one video to final heatmaps (N, J, H', W').
using HeatmapPredictor =
    std::function<torch::Tensor(const SyntheticVideo& video, const std::vector<FrameTriplet>& triplets)>;

/// Runs the model in inference mode. With substitute_aux the auxiliary
/// annotations of each triplet are rendered and replace the predicted
/// auxiliary heatmaps.
torch::Tensor predict_heatmaps(PoseModel& model, const std::vector<FrameTriplet>& triplets, bool substitute_aux,
                               int batch_size = 16);

HeatmapPredictor model_predictor(PoseModel& model, bool substitute_aux);

/// Decodes one (J, H', W') stack and maps it back to image coordinates.
Pose decode_to_image(const torch::Tensor& heatmaps, const FrameTriplet& triplet, const RenderParams& params);

/// Poses for the requested frames. In propagation mode labeled frames return
/// their annotation unchanged and the rest use the nearest labeled
/// neighbours; in estimation mode every frame is predicted from t -/+ 1.
std::map<int, Pose> predict_video_poses(const HeatmapPredictor& predictor, const SyntheticVideo& video,
                                        const std::vector<int>& frames, TripletMode mode,
                                        const LabelSchedule& schedule, CropSize crop, const RenderParams& params);

/// Every frame of a video under a label schedule, with annotations
/// substituted for the auxiliary heatmaps.
std::map<int, Pose> propagate_poses(PoseModel& model, const SyntheticVideo& video, const LabelSchedule& schedule);

/// Training split relabeled from a propagation model: schedule frames keep
/// manual labels, all others receive propagated pseudo-labels. Videos whose
/// propagation fails are dropped with a warning on stderr.
Dataset build_pseudo_dataset(PoseModel& model, const Dataset& dataset, int interval);

/// Estimation-mode training on manual and pseudo labels alike. The metrics
/// log starts with a record holding the manual ratio.
TrainResult pseudo_label_train(const Dataset& pseudo, const TrainConfig& config, const ModelConfig& model_config,
                               const ComponentFlags& flags, PoseModel* init = nullptr);

}  // namespace stdpose
