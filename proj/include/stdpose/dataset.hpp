// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stdpose/synthgen.hpp"

namespace stdpose {

enum class LabelSource : std::uint8_t { manual, pseudo, none };

std::string to_string(LabelSource s);
LabelSource label_source_from_string(const std::string& s);

/// A video plus the training labels it carries. video.gt_poses is always the
/// generator's ground truth (used for evaluation); labels may be sparse or
/// contain propagated pseudo-labels.
struct VideoRecord {
    std::string name;
    SyntheticVideo video;
    std::vector<Pose> labels;
    std::vector<LabelSource> label_source;
    std::optional<LabelSchedule> schedule;

    int num_labeled() const;
};

struct Dataset {
    SkeletonSpec skeleton = SkeletonSpec::default_spec();
    std::vector<VideoRecord> train;
    std::vector<VideoRecord> val;

    /// Fraction of labeled training frames whose label is manual.
    double manual_ratio() const;
    int count(LabelSource source) const;
};

struct DataConfig {
    int num_train_videos = 200;
    int num_val_videos = 50;
    SceneConfig scene;   // scene.seed is the base seed; video i uses a derived seed

    void validate() const;
};

VideoRecord make_record(std::string name, SyntheticVideo video);

/// Fully labeled (manual) train and val splits.
Dataset generate_dataset(const DataConfig& config, const SkeletonSpec& skeleton = SkeletonSpec::default_spec());

/// Keeps manual labels only on the stride-T frames of every training video.
Dataset sparsify_labels(const Dataset& dataset, int interval);

/// One directory per video with frame_0000.png... and annotations.json, plus
/// manifest.json and skeleton.json at the root.
void save_dataset(const Dataset& dataset, const std::string& directory);

/// Writes only annotation files and a manifest whose video entries point at
/// existing frame directories (used for pseudo-label manifests).
void save_dataset_annotations(const Dataset& dataset, const std::string& directory,
                              const std::vector<std::string>& train_frame_dirs,
                              const std::vector<std::string>& val_frame_dirs);

Dataset load_dataset(const std::string& manifest_path);

/// Frame directories of a loaded dataset in manifest order (absolute paths).
struct DatasetLocations {
    std::vector<std::string> train_dirs;
    std::vector<std::string> val_dirs;
};
DatasetLocations dataset_locations(const std::string& manifest_path);

Json data_config_to_json(const DataConfig& d);

}  // namespace stdpose
