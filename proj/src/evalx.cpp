// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/evalx.hpp"

#include <cmath>

#include "stdpose/propagate.hpp"

namespace stdpose {

std::vector<std::optional<bool>> pck(const Pose& pred, const Pose& gt, const BBox& box, double tau) {
    if (pred.coords.size() != gt.coords.size()) {
        throw InvalidArgument("pck: poses have different joint counts");
    }
    const double limit = tau * std::max(box.w, box.h);
    std::vector<std::optional<bool>> out(gt.coords.size());
    for (std::size_t j = 0; j < gt.coords.size(); ++j) {
        if (!gt.present(static_cast<int>(j))) continue;
        if (!pred.present(static_cast<int>(j))) {
            out[j] = false;
            continue;
        }
        const double d = std::hypot(pred.coords[j].x - gt.coords[j].x, pred.coords[j].y - gt.coords[j].y);
        out[j] = d <= limit;
    }
    return out;
}

std::optional<double> pck_ratio(const std::vector<std::optional<bool>>& flags) {
    int n = 0, c = 0;
    for (const auto& f : flags) {
        if (!f) continue;
        ++n;
        c += *f;
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / n;
}

Json EvalReport::to_json() const {
    return {{"per_joint_pck", per_joint_pck},
            {"mean_pck", mean_pck},
            {"num_frames", num_frames},
            {"threshold_tau", threshold_tau}};
}

EvalReport EvalReport::from_json(const Json& j) {
    EvalReport r;
    r.per_joint_pck = j.at("per_joint_pck").get<std::map<std::string, double>>();
    r.mean_pck = j.at("mean_pck").get<double>();
    r.num_frames = j.at("num_frames").get<int>();
    r.threshold_tau = j.at("threshold_tau").get<double>();
    return r;
}

PCKAccumulator::PCKAccumulator(const SkeletonSpec& skeleton)
    : names_(skeleton.joint_names), correct_(names_.size(), 0), total_(names_.size(), 0) {}

void PCKAccumulator::add(const Pose& pred, const Pose& gt, const BBox& box, double tau) {
    const auto flags = pck(pred, gt, box, tau);
    if (flags.size() != names_.size()) {
        throw InvalidArgument("pck: pose does not match the skeleton");
    }
    for (std::size_t j = 0; j < flags.size(); ++j) {
        if (!flags[j]) continue;
        ++total_[j];
        correct_[j] += *flags[j];
    }
    ++frames_;
}

EvalReport PCKAccumulator::report(double tau) const {
    EvalReport r;
    r.threshold_tau = tau;
    r.num_frames = frames_;
    double sum = 0.0;
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (total_[j] == 0) continue;
        const double v = static_cast<double>(correct_[j]) / static_cast<double>(total_[j]);
        r.per_joint_pck[names_[j]] = v;
    }
    for (const auto& [name, v] : r.per_joint_pck) sum += v;
    r.mean_pck = r.per_joint_pck.empty() ? 0.0 : sum / static_cast<double>(r.per_joint_pck.size());
    return r;
}

std::vector<int> evaluation_frames(int num_frames, const EvalOptions& options) {
    std::vector<int> frames;
    const auto schedule = build_label_schedule(num_frames, options.interval);
    for (int t = 0; t < num_frames; ++t) {
        if (!options.unlabeled_only || !schedule.is_labeled(t)) frames.push_back(t);
    }
    return frames;
}

EvalReport evaluate_predictor(const std::function<torch::Tensor(const SyntheticVideo&, const std::vector<FrameTriplet>&)>&
                                  predictor,
                              const std::vector<VideoRecord>& videos, TripletMode mode, const EvalOptions& options,
                              const ModelConfig& model_config, const SkeletonSpec& skeleton) {
    if (videos.empty()) {
        throw InvalidState("evaluation split is empty");
    }
    PCKAccumulator acc(skeleton);
    const CropSize crop{model_config.crop_height, model_config.crop_width};
    const auto params = model_config.render_params();
    for (const auto& r : videos) {
        const int n = r.video.num_frames();
        const auto schedule = build_label_schedule(n, options.interval);
        const auto frames = evaluation_frames(n, options);
        if (frames.empty()) continue;
        const auto poses = predict_video_poses(predictor, r.video, frames, mode, schedule, crop, params);
        for (const auto& [t, pose] : poses) {
            const auto tu = static_cast<std::size_t>(t);
            acc.add(pose, r.video.gt_poses[tu], r.video.gt_boxes[tu], options.tau);
        }
    }
    return acc.report(options.tau);
}

EvalReport evaluate(PoseModel& model, const std::vector<VideoRecord>& videos, TripletMode mode,
                    const EvalOptions& options, const SkeletonSpec& skeleton) {
    return evaluate_predictor(model_predictor(model, options.substitute_aux), videos, mode, options, model->config(),
                              skeleton);
}

}  // namespace stdpose
