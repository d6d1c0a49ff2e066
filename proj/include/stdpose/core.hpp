// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "json.hpp"
#include "stdpose/errors.hpp"

namespace stdpose {

using Json = nlohmann::json;

/// Joint layout of the articulated skeleton.
///
/// flip_pairs swap left and right joints under horizontal mirroring; bones
/// form a tree rooted anywhere and are used both for rendering and for the
/// kinematic chain of the synthetic generator.
struct SkeletonSpec {
    std::vector<std::string> joint_names;
    std::vector<std::pair<int, int>> flip_pairs;
    std::vector<std::pair<int, int>> bones;

    int joint_count() const { return static_cast<int>(joint_names.size()); }

    /// Permutation p with p[j] = index of j's mirror partner (or j itself).
    std::vector<int> flip_permutation() const;

    /// Throws InvalidArgument unless indices are in range, flip pairs are
    /// disjoint and the bones span a connected tree.
    void validate() const;

    /// 15-joint PoseTrack-style layout.
    static SkeletonSpec default_spec();

    Json to_json() const;
    static SkeletonSpec from_json(const Json& j);
    static SkeletonSpec load(const std::string& path);
    void save(const std::string& path) const;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
};

enum class Visibility : std::uint8_t { visible, occluded, absent };

std::string to_string(Visibility v);
Visibility visibility_from_string(const std::string& s);

struct Pose {
    std::vector<Point2> coords;
    std::vector<Visibility> visibility;

    Pose() = default;
    explicit Pose(int joint_count)
        : coords(static_cast<std::size_t>(joint_count)),
          visibility(static_cast<std::size_t>(joint_count), Visibility::visible) {}

    int size() const { return static_cast<int>(coords.size()); }
    bool present(int j) const { return visibility[static_cast<std::size_t>(j)] != Visibility::absent; }

    bool operator==(const Pose& other) const;

    Json to_json() const;
    static Pose from_json(const Json& j);
};

/// Frames of a video carrying manual annotations: every interval-th frame
/// starting at 0.
struct LabelSchedule {
    int num_frames = 0;
    int interval = 1;
    std::vector<int> labeled_indices;
    double ratio = 0.0;

    bool is_labeled(int frame) const;
    /// Largest labeled index <= frame (or < frame when strict).
    std::optional<int> labeled_at_or_before(int frame, bool strict = false) const;
    /// Smallest labeled index >= frame (or > frame when strict).
    std::optional<int> labeled_at_or_after(int frame, bool strict = false) const;

    Json to_json() const;
    static LabelSchedule from_json(const Json& j);
};

LabelSchedule build_label_schedule(int num_frames, int interval);

/// Scales width and height by factor about the box center.
BBox expand_bbox(const BBox& box, double factor = 1.25);

/// Mirrors x about image_width (x' = width - x) and swaps flip pairs.
Pose flip_pose(const Pose& pose, const SkeletonSpec& spec, double image_width);

/// Row-major 2x3 affine map: [x', y'] = A * [x, y, 1].
struct Affine2 {
    std::array<double, 6> m{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

    static Affine2 identity() { return {}; }
    Point2 apply(Point2 p) const;
    /// (*this) after other: x -> this(other(x)).
    Affine2 compose(const Affine2& other) const;
    Affine2 inverse() const;
    /// Uniform scale factor of the linear part (sqrt |det|).
    double scale() const;
};

Pose transform_pose(const Pose& pose, const Affine2& t);

enum class HeatmapOrigin : std::uint8_t { predicted, rendered, residual, merged, masked };

/// Per-joint response maps, shape (J, H', W'), float32.
struct HeatmapStack {
    torch::Tensor values;
    HeatmapOrigin origin = HeatmapOrigin::predicted;

    int joints() const { return static_cast<int>(values.size(0)); }
    int height() const { return static_cast<int>(values.size(1)); }
    int width() const { return static_cast<int>(values.size(2)); }
};

/// Key frame plus its two auxiliary frames, cropped with one shared transform.
struct FrameTriplet {
    torch::Tensor key_image;    // (3, H, W) float in [0, 1]
    torch::Tensor left_image;
    torch::Tensor right_image;
    int key_index = 0;
    int left_index = 0;
    int right_index = 0;
    std::optional<Pose> left_annotation;   // crop coordinates
    std::optional<Pose> right_annotation;
    Affine2 crop_transform;   // image -> crop coordinates
    BBox key_box;             // ground-truth box of the key frame (image coordinates)
};

}  // namespace stdpose
