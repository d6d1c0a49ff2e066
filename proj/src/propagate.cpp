// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/propagate.hpp"

#include <iostream>

namespace stdpose {

torch::Tensor predict_heatmaps(PoseModel& model, const std::vector<FrameTriplet>& triplets, bool substitute_aux,
                               int batch_size) {
    if (triplets.empty()) {
        throw InvalidArgument("predict_heatmaps: no triplets");
    }
    torch::NoGradGuard no_grad;
    model->eval();
    const auto render = model->config().render_params();
    std::vector<torch::Tensor> outputs;
    for (std::size_t b = 0; b < triplets.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(triplets.size(), b + static_cast<std::size_t>(batch_size));
        std::vector<torch::Tensor> left, key, right;
        std::vector<Pose> aux_l, aux_r;
        bool have_aux = substitute_aux;
        for (std::size_t i = b; i < e; ++i) {
            const auto& t = triplets[i];
            left.push_back(t.left_image);
            key.push_back(t.key_image);
            right.push_back(t.right_image);
            if (t.left_annotation && t.right_annotation) {
                aux_l.push_back(*t.left_annotation);
                aux_r.push_back(*t.right_annotation);
            } else {
                have_aux = false;
            }
        }
        std::optional<torch::Tensor> hl, hr;
        if (have_aux) {
            hl = render_heatmap_batch(aux_l, render);
            hr = render_heatmap_batch(aux_r, render);
        }
        outputs.push_back(model->forward(torch::stack(left), torch::stack(key), torch::stack(right), hl, hr).final);
    }
    return torch::cat(outputs, 0);
}

HeatmapPredictor model_predictor(PoseModel& model, bool substitute_aux) {
    return [model, substitute_aux](const SyntheticVideo&, const std::vector<FrameTriplet>& triplets) mutable {
        return predict_heatmaps(model, triplets, substitute_aux);
    };
}

Pose decode_to_image(const torch::Tensor& heatmaps, const FrameTriplet& triplet, const RenderParams& params) {
    const Pose crop_pose = decode_heatmaps({heatmaps, HeatmapOrigin::predicted}, params);
    return transform_pose(crop_pose, triplet.crop_transform.inverse());
}

std::map<int, Pose> predict_video_poses(const HeatmapPredictor& predictor, const SyntheticVideo& video,
                                        const std::vector<int>& frames, TripletMode mode,
                                        const LabelSchedule& schedule, CropSize crop, const RenderParams& params) {
    std::map<int, Pose> poses;
    std::vector<FrameTriplet> triplets;
    for (int t : frames) {
        if (t < 0 || t >= video.num_frames()) {
            throw InvalidArgument("frame index out of range");
        }
        if (mode == TripletMode::propagation && schedule.is_labeled(t)) {
            poses[t] = video.gt_poses[static_cast<std::size_t>(t)];
        } else {
            triplets.push_back(crop_triplet(video, t, mode, schedule, crop));
        }
    }
    if (!triplets.empty()) {
        const auto heatmaps = predictor(video, triplets);
        for (std::size_t i = 0; i < triplets.size(); ++i) {
            poses[triplets[i].key_index] = decode_to_image(heatmaps[static_cast<int64_t>(i)], triplets[i], params);
        }
    }
    return poses;
}

std::map<int, Pose> propagate_poses(PoseModel& model, const SyntheticVideo& video, const LabelSchedule& schedule) {
    if (schedule.labeled_indices.empty()) {
        throw InvalidState("propagate_poses: schedule has no labeled frames");
    }
    std::vector<int> frames(static_cast<std::size_t>(video.num_frames()));
    for (int t = 0; t < video.num_frames(); ++t) frames[static_cast<std::size_t>(t)] = t;
    const auto& c = model->config();
    return predict_video_poses(model_predictor(model, true), video, frames, TripletMode::propagation, schedule,
                               {c.crop_height, c.crop_width}, c.render_params());
}

Dataset build_pseudo_dataset(PoseModel& model, const Dataset& dataset, int interval) {
    Dataset out;
    out.skeleton = dataset.skeleton;
    out.val = dataset.val;
    for (const auto& record : dataset.train) {
        try {
            const auto schedule = build_label_schedule(record.video.num_frames(), interval);
            const auto poses = propagate_poses(model, record.video, schedule);
            VideoRecord r = record;
            r.schedule = schedule;
            for (const auto& [t, pose] : poses) {
                const auto tu = static_cast<std::size_t>(t);
                const bool manual = schedule.is_labeled(t);
                r.labels[tu] = manual ? record.video.gt_poses[tu] : pose;
                r.label_source[tu] = manual ? LabelSource::manual : LabelSource::pseudo;
            }
            out.train.push_back(std::move(r));
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << record.name << ": " << e.what() << '\n';
        }
    }
    return out;
}

TrainResult pseudo_label_train(const Dataset& pseudo, const TrainConfig& config, const ModelConfig& model_config,
                               const ComponentFlags& flags, PoseModel* init) {
    TrainConfig c = config;
    c.mode = TrainMode::estimation;
    TrainResult result = train_model(pseudo, c, model_config, flags, init);
    MetricsLog log;
    log.add(Json{{"phase", "info"},
                 {"manual_ratio", pseudo.manual_ratio()},
                 {"manual_frames", pseudo.count(LabelSource::manual)},
                 {"pseudo_frames", pseudo.count(LabelSource::pseudo)}});
    for (const auto& r : result.log.records()) log.add(r);
    result.log = log;
    return result;
}

}  // namespace stdpose
