// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <opencv2/core.hpp>

#include "stdpose/core.hpp"

namespace stdpose {

struct SceneConfig {
    int num_frames = 30;
    int image_height = 128;
    int image_width = 128;
    int num_occluders = 2;
    double occluder_size = 0.3;       // largest side as a fraction of body height
    int occluder_frames = 8;          // longest occluder lifetime
    double blur_probability = 0.1;
    double motion_smoothness = 8.0;   // frames between spline control points
    double max_joint_step = 6.0;      // px per frame, enforced on every joint
    double noise_sigma = 0.02;        // fraction of the 8-bit dynamic range
    std::uint64_t seed = 0;

    void validate() const;
};

enum DegradationFlag : std::uint8_t {
    kNoDegradation = 0,
    kOccluded = 1u << 0,
    kBlurred = 1u << 1,
};

struct SyntheticVideo {
    std::vector<cv::Mat> frames;   // CV_8UC3, H x W
    std::vector<Pose> gt_poses;    // image coordinates
    std::vector<BBox> gt_boxes;
    std::vector<std::uint8_t> degradation_flags;

    int num_frames() const { return static_cast<int>(frames.size()); }
};

/// One stick figure on a flat noisy background, following smooth random
/// joint-angle trajectories. Fully determined by config.seed.
SyntheticVideo generate_video(const SceneConfig& config,
                              const SkeletonSpec& skeleton = SkeletonSpec::default_spec());

/// Draws the figure for a pose onto an 8-bit image.
void draw_figure(cv::Mat& image, const Pose& pose, const SkeletonSpec& skeleton, double body_height);

enum class TripletMode { estimation, propagation };

struct CropSize {
    int height = 128;
    int width = 96;
};

/// Image -> crop transform for the key box: expanded by 25%, grown to the
/// crop aspect ratio and scaled onto crop_size.
Affine2 crop_transform_for(const BBox& box, CropSize crop_size);

/// Warps an 8-bit frame through t into a (3, H, W) float tensor in [0, 1].
/// Out-of-image pixels are zero.
torch::Tensor warp_to_tensor(const cv::Mat& frame, const Affine2& t, CropSize crop_size);

torch::Tensor mat_to_tensor(const cv::Mat& image);

/// Builds the triplet for key_index.
///
/// estimation: neighbours key_index -/+ 1, clamped to the video.
/// propagation: nearest labeled frames at or before / at or after key_index
/// (strictly before / after when strict_neighbors); a missing side repeats
/// the other side. Annotations of the auxiliary frames are attached in crop
/// coordinates.
FrameTriplet crop_triplet(const SyntheticVideo& video, int key_index, TripletMode mode,
                          const LabelSchedule& schedule, CropSize crop_size,
                          bool strict_neighbors = false);

/// Auxiliary frame indices crop_triplet would pick, without the cropping.
std::pair<int, int> triplet_neighbors(int num_frames, int key_index, TripletMode mode,
                                      const LabelSchedule& schedule, bool strict_neighbors = false);

}  // namespace stdpose
