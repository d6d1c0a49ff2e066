// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stdpose/dataset.hpp"
#include "stdpose/miobj.hpp"
#include "stdpose/model.hpp"

namespace stdpose {

struct AugmentConfig {
    bool enabled = true;
    double rotation_min = -45.0;   // degrees
    double rotation_max = 45.0;
    double scale_min = 0.65;
    double scale_max = 1.35;
    double flip_prob = 0.5;
    double half_body_prob = 0.0;

    void validate() const;
    Json to_json() const;
    static AugmentConfig from_json(const Json& j, const std::string& path);
};

enum class TrainMode { propagation, estimation };
std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::propagation;
    int epochs = 20;
    double base_lr = 2e-4;
    std::vector<int> decay_epochs{12, 16};
    double decay_factor = 10.0;
    int batch_size = 16;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    AugmentConfig augmentation;
    MILossWeights weights;
    int interval = 7;              // label stride T for propagation triplets
    int samples_per_video = 4;     // key frames drawn per video and epoch; <= 0 takes all
    bool freeze_backbone = false;  // when set, temporal variants train only the temporal modules
    double estimator_lr_multiplier = 10.0;
    int val_every = 0;             // epochs between validation passes; 0 disables
    double val_tau = 0.1;

    void validate() const;
    Json to_json() const;
    static TrainConfig from_json(const Json& j, const std::string& path);
};

/// Single-frame training of backbone and head on an independent fully
/// labeled corpus; the result initializes every later run.
struct PretrainConfig {
    int epochs = 8;
    double lr = 1e-3;
    int batch_size = 16;
    int samples_per_video = 6;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    AugmentConfig augmentation;

    void validate() const;
    Json to_json() const;
    static PretrainConfig from_json(const Json& j, const std::string& path);
};

/// Mean squared error over all elements.
torch::Tensor heatmap_loss(const torch::Tensor& pred, const torch::Tensor& gt);
double heatmap_loss(const HeatmapStack& pred, const HeatmapStack& gt);

double total_loss(double l_h, double l_mi);
torch::Tensor total_loss(const torch::Tensor& l_h, const torch::Tensor& l_mi);

double lr_at_epoch(int epoch, const TrainConfig& config);

/// One rotation / scale / flip draw (plus optional half-body zoom) applied to
/// all three crops, the auxiliary annotations and the key pose. The pose is
/// in crop coordinates.
std::pair<FrameTriplet, Pose> augment_sample(const FrameTriplet& triplet, const Pose& gt, const AugmentConfig& config,
                                             std::uint64_t seed,
                                             const SkeletonSpec& skeleton = SkeletonSpec::default_spec());

/// The crop-space augmentation transform a seed draws, for a crop size.
Affine2 draw_augmentation(const AugmentConfig& config, std::uint64_t seed, CropSize crop, bool* flipped,
                          const Pose* half_body_pose = nullptr, const SkeletonSpec* skeleton = nullptr);

struct TrainingSample {
    FrameTriplet triplet;
    Pose label;   // crop coordinates
};

/// Crop a training sample for key frame t of a record.
TrainingSample make_sample(const VideoRecord& record, int key_index, TrainMode mode, int interval, CropSize crop);

/// Key frames used by one epoch, as (video, frame) pairs in shuffled order.
std::vector<std::pair<int, int>> epoch_key_frames(const std::vector<VideoRecord>& videos, int samples_per_video,
                                                  std::uint64_t seed);

struct StepRecord {
    std::string phase;
    int epoch = 0;
    int step = 0;
    double l_h = 0.0;
    double l_mi = 0.0;
    double total = 0.0;
    double lr = 0.0;

    Json to_json() const;
};

/// Line-delimited JSON records.
class MetricsLog {
public:
    void add(const Json& record) { records_.push_back(record); }
    void add(const StepRecord& r) { records_.push_back(r.to_json()); }
    const std::vector<Json>& records() const { return records_; }
    std::vector<Json> phase(const std::string& name) const;
    void write(const std::string& path) const;
    static MetricsLog read(const std::string& path);

private:
    std::vector<Json> records_;
};

/// Optimizer state for one model plus its MI estimators.
class Trainer {
public:
    Trainer(PoseModel model, const TrainConfig& config, const SkeletonSpec& skeleton);

    /// One optimizer step on a batch of samples (already augmented).
    StepRecord step(const std::vector<TrainingSample>& batch, int epoch);

    PoseModel& model() { return model_; }
    int steps_taken() const { return step_; }

private:
    PoseModel model_;
    TrainConfig config_;
    SkeletonSpec skeleton_;
    RenderParams render_;
    bool mi_active_ = false;
    MutualInformationObjective objective_{nullptr};
    std::unique_ptr<torch::optim::AdamW> optimizer_;
    std::unique_ptr<torch::optim::AdamW> estimator_optimizer_;
    int step_ = 0;
};

struct TrainResult {
    PoseModel model{nullptr};
    MetricsLog log;
    std::optional<double> final_val_pck;
};

/// Backbone and head trained on single frames of a fully labeled corpus.
TrainResult pretrain_backbone(const Dataset& corpus, const ModelConfig& model_config, const PretrainConfig& config);

/// Main training loop. When init is given its matching tensors seed the new
/// model (e.g. a pretrained backbone).
TrainResult train_model(const Dataset& dataset, const TrainConfig& config, const ModelConfig& model_config,
                        const ComponentFlags& flags, PoseModel* init = nullptr);

}  // namespace stdpose
