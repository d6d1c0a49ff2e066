// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stdpose/dataset.hpp"
#include "stdpose/model.hpp"

namespace stdpose {

/// Per-joint correctness: true iff the joint lies within tau * max(w, h) of
/// its ground truth (inclusive). Absent ground-truth joints give nullopt.
std::vector<std::optional<bool>> pck(const Pose& pred, const Pose& gt, const BBox& box, double tau);

/// Correct fraction over the non-excluded joints; nullopt when none count.
std::optional<double> pck_ratio(const std::vector<std::optional<bool>>& flags);

struct EvalReport {
    std::map<std::string, double> per_joint_pck;   // joints with at least one counted instance
    double mean_pck = 0.0;                         // unweighted mean of per_joint_pck
    int num_frames = 0;
    double threshold_tau = 0.1;

    Json to_json() const;
    static EvalReport from_json(const Json& j);
};

struct EvalOptions {
    double tau = 0.1;
    int interval = 7;              // schedule stride for propagation and for unlabeled_only
    bool unlabeled_only = false;   // restrict to frames off the stride-interval schedule
    bool substitute_aux = true;    // propagation: annotations replace auxiliary heatmaps
};

class PCKAccumulator {
public:
    explicit PCKAccumulator(const SkeletonSpec& skeleton);
    void add(const Pose& pred, const Pose& gt, const BBox& box, double tau);
    EvalReport report(double tau) const;

private:
    std::vector<std::string> names_;
    std::vector<long> correct_, total_;
    int frames_ = 0;
};

/// Frames that evaluate() scores for one video.
std::vector<int> evaluation_frames(int num_frames, const EvalOptions& options);

/// Inference over the videos in the given mode, scored against the
/// generator's ground truth with the ground-truth box as the PCK reference.
EvalReport evaluate(PoseModel& model, const std::vector<VideoRecord>& videos, TripletMode mode,
                    const EvalOptions& options, const SkeletonSpec& skeleton = SkeletonSpec::default_spec());

/// As evaluate(), with any predictor in place of the model.
EvalReport evaluate_predictor(const std::function<torch::Tensor(const SyntheticVideo&, const std::vector<FrameTriplet>&)>&
                                  predictor,
                              const std::vector<VideoRecord>& videos, TripletMode mode, const EvalOptions& options,
                              const ModelConfig& model_config, const SkeletonSpec& skeleton);

}  // namespace stdpose
