// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

#include <opencv2/imgproc.hpp>

namespace stdpose {

void SceneConfig::validate() const {
    if (num_frames < 1) {
        throw InvalidArgument("num_frames must be >= 1");
    }
    if (blur_probability < 0.0 || blur_probability > 1.0) {
        throw InvalidArgument("blur_probability must lie in [0, 1]");
    }
    if (num_occluders < 0) {
        throw InvalidArgument("num_occluders must be >= 0");
    }
    if (!(occluder_size > 0.0) || occluder_frames < 1) {
        throw InvalidArgument("occluders need a positive size and lifetime");
    }
    if (noise_sigma < 0.0) {
        throw InvalidArgument("noise_sigma must be >= 0");
    }
    if (!(motion_smoothness > 0.0)) {
        throw InvalidArgument("motion_smoothness must be positive");
    }
    if (!(max_joint_step > 0.0)) {
        throw InvalidArgument("max_joint_step must be positive");
    }
    if (image_height < 48 || image_width < 48) {
        throw InvalidArgument("image too small to contain the skeleton (need at least 48x48 px)");
    }
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Bone parameters keyed by child joint name. Angles are relative to the parent
// bone's absolute direction (image coordinates, y down); bones leaving the root
// are relative to 0.
struct BoneRig {
    double base_deg;
    double length;       // fraction of body height
    double amplitude_deg;
};

const std::unordered_map<std::string, BoneRig>& default_rig() {
    static const std::unordered_map<std::string, BoneRig> rig = {
        {"nose", {-90.0, 0.09, 8.0}},
        {"head_top", {0.0, 0.09, 10.0}},
        {"left_shoulder", {0.0, 0.11, 5.0}},
        {"right_shoulder", {180.0, 0.11, 5.0}},
        {"left_elbow", {70.0, 0.17, 50.0}},
        {"right_elbow", {-70.0, 0.17, 50.0}},
        {"left_wrist", {10.0, 0.15, 50.0}},
        {"right_wrist", {-10.0, 0.15, 50.0}},
        {"left_hip", {80.0, 0.32, 4.0}},
        {"right_hip", {100.0, 0.32, 4.0}},
        {"left_knee", {5.0, 0.24, 22.0}},
        {"right_knee", {-5.0, 0.24, 22.0}},
        {"left_ankle", {0.0, 0.24, 22.0}},
        {"right_ankle", {0.0, 0.24, 22.0}},
    };
    return rig;
}

// Catmull-Rom interpolation through uniformly spaced random control values.
class SmoothSignal {
public:
    SmoothSignal(std::mt19937_64& rng, double duration, double spacing) : spacing_(spacing) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const int count = static_cast<int>(std::ceil(duration / spacing)) + 4;
        points_.resize(static_cast<std::size_t>(count));
        for (auto& p : points_) {
            p = u(rng);
        }
    }

    double operator()(double t) const {
        const double s = t / spacing_ + 1.0;   // control point 0 sits at t = -spacing
        const int i = std::clamp(static_cast<int>(std::floor(s)), 1, static_cast<int>(points_.size()) - 3);
        const double f = s - i;
        const double p0 = points_[static_cast<std::size_t>(i - 1)];
        const double p1 = points_[static_cast<std::size_t>(i)];
        const double p2 = points_[static_cast<std::size_t>(i + 1)];
        const double p3 = points_[static_cast<std::size_t>(i + 2)];
        return 0.5 * ((2.0 * p1) + (-p0 + p2) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f * f +
                      (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f * f * f);
    }

private:
    double spacing_;
    std::vector<double> points_;
};

struct Kinematics {
    int root = 0;
    std::vector<int> order;            // joints in parent-first order, root excluded
    std::vector<int> parent;
    std::vector<BoneRig> rig;
};

Kinematics build_kinematics(const SkeletonSpec& skeleton) {
    const int n = skeleton.joint_count();
    Kinematics k;
    k.parent.assign(static_cast<std::size_t>(n), -1);
    k.rig.assign(static_cast<std::size_t>(n), BoneRig{90.0, 0.15, 20.0});

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [a, b] : skeleton.bones) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    }
    auto root_it = std::find(skeleton.joint_names.begin(), skeleton.joint_names.end(), "head_bottom");
    k.root = root_it == skeleton.joint_names.end()
                 ? 0
                 : static_cast<int>(std::distance(skeleton.joint_names.begin(), root_it));

    std::vector<int> queue{k.root};
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    seen[static_cast<std::size_t>(k.root)] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int j = queue[head];
        for (int c : adj[static_cast<std::size_t>(j)]) {
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = true;
                k.parent[static_cast<std::size_t>(c)] = j;
                k.order.push_back(c);
                queue.push_back(c);
            }
        }
    }
    const auto& rig = default_rig();
    for (int j = 0; j < n; ++j) {
        auto it = rig.find(skeleton.joint_names[static_cast<std::size_t>(j)]);
        if (it != rig.end()) {
            k.rig[static_cast<std::size_t>(j)] = it->second;
        }
    }
    return k;
}

struct MotionModel {
    double body_height = 0.0;
    double root_x = 0.0;
    double root_y = 0.0;
    double drift_x = 0.0;
    double drift_y = 0.0;
    double lean_amplitude = 0.0;
    SmoothSignal path_x;
    SmoothSignal path_y;
    SmoothSignal lean;
    std::vector<SmoothSignal> angles;   // one per joint (root unused)
    double amplitude_scale = 1.0;
};

Pose pose_at(const MotionModel& m, const Kinematics& kin, int joint_count, double t) {
    Pose pose(joint_count);
    std::vector<double> abs_angle(static_cast<std::size_t>(joint_count), 0.0);
    pose.coords[static_cast<std::size_t>(kin.root)] = {m.root_x + m.drift_x * m.path_x(t),
                                                       m.root_y + m.drift_y * m.path_y(t)};
    const double lean = m.lean_amplitude * m.lean(t) * m.amplitude_scale;
    for (int j : kin.order) {
        const auto ju = static_cast<std::size_t>(j);
        const int p = kin.parent[ju];
        const auto pu = static_cast<std::size_t>(p);
        const BoneRig& r = kin.rig[ju];
        const double parent_angle = p == kin.root ? lean : abs_angle[pu];
        abs_angle[ju] = parent_angle + (r.base_deg + r.amplitude_deg * m.amplitude_scale * m.angles[ju](t)) * kDeg;
        const double len = r.length * m.body_height;
        pose.coords[ju] = {pose.coords[pu].x + len * std::cos(abs_angle[ju]),
                           pose.coords[pu].y + len * std::sin(abs_angle[ju])};
    }
    return pose;
}

double max_step(const std::vector<Pose>& poses) {
    double worst = 0.0;
    for (std::size_t t = 1; t < poses.size(); ++t) {
        for (std::size_t j = 0; j < poses[t].coords.size(); ++j) {
            worst = std::max(worst, std::hypot(poses[t].coords[j].x - poses[t - 1].coords[j].x,
                                               poses[t].coords[j].y - poses[t - 1].coords[j].y));
        }
    }
    return worst;
}

BBox tight_box(const Pose& pose) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& c : pose.coords) {
        x0 = std::min(x0, c.x);
        y0 = std::min(y0, c.y);
        x1 = std::max(x1, c.x);
        y1 = std::max(y1, c.y);
    }
    const double pad = 0.08 * std::max(x1 - x0, y1 - y0) + 2.0;
    return {x0 - pad, y0 - pad, (x1 - x0) + 2.0 * pad, (y1 - y0) + 2.0 * pad};
}

cv::Scalar joint_color(const std::string& name) {
    // mirror partners share a color so left/right is decided by layout only
    static const std::unordered_map<std::string, cv::Scalar> palette = {
        {"nose", {255, 80, 80}},       {"head_bottom", {255, 255, 90}}, {"head_top", {200, 90, 255}},
        {"shoulder", {90, 255, 90}},   {"elbow", {90, 200, 255}},       {"wrist", {255, 160, 40}},
        {"hip", {40, 120, 255}},       {"knee", {255, 90, 200}},        {"ankle", {140, 255, 220}},
    };
    for (const auto& [key, color] : palette) {
        if (name == key || name.ends_with("_" + key)) {
            return color;
        }
    }
    return {230, 230, 230};
}

}  // namespace

void draw_figure(cv::Mat& image, const Pose& pose, const SkeletonSpec& skeleton, double body_height) {
    constexpr int kShift = 4;   // fixed-point sub-pixel precision for cv drawing
    constexpr double kScale = 1 << kShift;
    auto pt = [&](int j) {
        const auto& c = pose.coords[static_cast<std::size_t>(j)];
        return cv::Point(static_cast<int>(std::lround(c.x * kScale)), static_cast<int>(std::lround(c.y * kScale)));
    };
    const int thickness = std::max(2, static_cast<int>(std::lround(body_height / 28.0)));
    const int radius = std::max(2, static_cast<int>(std::lround(body_height / 24.0)));
    for (const auto& [a, b] : skeleton.bones) {
        const cv::Scalar color = joint_color(skeleton.joint_names[static_cast<std::size_t>(b)]) * 0.6;
        cv::line(image, pt(a), pt(b), color, thickness, cv::LINE_AA, kShift);
    }
    for (int j = 0; j < pose.size(); ++j) {
        cv::circle(image, pt(j), radius * static_cast<int>(kScale),
                   joint_color(skeleton.joint_names[static_cast<std::size_t>(j)]), cv::FILLED, cv::LINE_AA, kShift);
    }
}

SyntheticVideo generate_video(const SceneConfig& config, const SkeletonSpec& skeleton) {
    config.validate();
    skeleton.validate();
    const int n = skeleton.joint_count();
    const double H = config.image_height;
    const double W = config.image_width;
    const Kinematics kin = build_kinematics(skeleton);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

    const double duration = config.num_frames + 2.0;
    const double spacing = config.motion_smoothness;
    MotionModel m{.body_height = range(0.85, 1.05) * 0.55 * std::min(H, W * 1.4),
                  .path_x = SmoothSignal(rng, duration, spacing),
                  .path_y = SmoothSignal(rng, duration, spacing),
                  .lean = SmoothSignal(rng, duration, spacing)};
    for (int j = 0; j < n; ++j) {
        m.angles.emplace_back(rng, duration, spacing);
    }
    m.root_x = W * range(0.42, 0.58);
    m.root_y = H * 0.5 - 0.31 * m.body_height;
    m.drift_x = W * 0.12;
    m.drift_y = H * 0.03;
    m.lean_amplitude = 8.0 * kDeg;

    std::vector<Pose> poses;
    for (int attempt = 0; attempt < 40; ++attempt) {
        poses.clear();
        for (int t = 0; t < config.num_frames; ++t) {
            poses.push_back(pose_at(m, kin, n, t));
        }
        if (max_step(poses) <= config.max_joint_step) {
            break;
        }
        // damp the motion until the per-frame step bound holds
        m.amplitude_scale *= 0.85;
        m.drift_x *= 0.85;
        m.drift_y *= 0.85;
    }
    if (max_step(poses) > config.max_joint_step) {
        m.amplitude_scale = 0.0;
        m.drift_x = m.drift_y = 0.0;
        poses.clear();
        for (int t = 0; t < config.num_frames; ++t) {
            poses.push_back(pose_at(m, kin, n, t));
        }
    }

    SyntheticVideo video;
    video.gt_poses = poses;
    video.degradation_flags.assign(static_cast<std::size_t>(config.num_frames), kNoDegradation);
    for (const auto& p : poses) {
        video.gt_boxes.push_back(tight_box(p));
    }

    const cv::Scalar background = cv::Scalar::all(range(50.0, 150.0));

    struct Occluder {
        int start, end;
        cv::Rect2d rect;
        cv::Scalar color;
    };
    std::vector<Occluder> occluders;
    for (int o = 0; o < config.num_occluders; ++o) {
        const int shortest = std::min(3, config.occluder_frames);
        const int len = shortest + static_cast<int>(uni(rng) * (config.occluder_frames - shortest + 1));
        const int start = static_cast<int>(uni(rng) * config.num_frames);
        const int target = static_cast<int>(uni(rng) * n) % n;
        const double side_w = range(0.55, 1.0) * config.occluder_size * m.body_height;
        const double side_h = range(0.55, 1.0) * config.occluder_size * m.body_height;
        const auto& c = poses[static_cast<std::size_t>(start)].coords[static_cast<std::size_t>(target)];
        const double cx = c.x + range(-0.25, 0.25) * side_w;
        const double cy = c.y + range(-0.25, 0.25) * side_h;
        occluders.push_back({start, std::min(config.num_frames, start + len),
                             cv::Rect2d(cx - side_w / 2, cy - side_h / 2, side_w, side_h),
                             cv::Scalar(range(20, 235), range(20, 235), range(20, 235))});
    }

    std::normal_distribution<double> noise(0.0, config.noise_sigma * 255.0);
    for (int t = 0; t < config.num_frames; ++t) {
        const auto tu = static_cast<std::size_t>(t);
        cv::Mat frame;
        if (uni(rng) < config.blur_probability) {
            cv::Mat acc = cv::Mat::zeros(config.image_height, config.image_width, CV_32FC3);
            for (double dt : {-1.0 / 3.0, 0.0, 1.0 / 3.0}) {
                cv::Mat sub(config.image_height, config.image_width, CV_8UC3, background);
                draw_figure(sub, pose_at(m, kin, n, t + dt), skeleton, m.body_height);
                cv::Mat subf;
                sub.convertTo(subf, CV_32FC3);
                acc += subf;
            }
            acc.convertTo(frame, CV_8UC3, 1.0 / 3.0);
            video.degradation_flags[tu] |= kBlurred;
        } else {
            frame = cv::Mat(config.image_height, config.image_width, CV_8UC3, background);
            draw_figure(frame, poses[tu], skeleton, m.body_height);
        }

        for (const auto& occ : occluders) {
            if (t < occ.start || t >= occ.end) {
                continue;
            }
            cv::rectangle(frame,
                          cv::Point(static_cast<int>(std::lround(occ.rect.x)), static_cast<int>(std::lround(occ.rect.y))),
                          cv::Point(static_cast<int>(std::lround(occ.rect.x + occ.rect.width)),
                                    static_cast<int>(std::lround(occ.rect.y + occ.rect.height))),
                          occ.color, cv::FILLED);
            for (int j = 0; j < n; ++j) {
                const auto& c = poses[tu].coords[static_cast<std::size_t>(j)];
                if (occ.rect.contains(cv::Point2d(c.x, c.y))) {
                    video.gt_poses[tu].visibility[static_cast<std::size_t>(j)] = Visibility::occluded;
                    video.degradation_flags[tu] |= kOccluded;
                }
            }
        }

        if (config.noise_sigma > 0.0) {
            cv::Mat f;
            frame.convertTo(f, CV_32FC3);
            for (int r = 0; r < f.rows; ++r) {
                auto* row = f.ptr<float>(r);
                for (int c = 0; c < f.cols * 3; ++c) {
                    row[c] += static_cast<float>(noise(rng));
                }
            }
            f.convertTo(frame, CV_8UC3);   // saturating
        }
        video.frames.push_back(frame);
    }
    return video;
}

Affine2 crop_transform_for(const BBox& box, CropSize crop_size) {
    BBox b = expand_bbox(box, 1.25);
    const double aspect = static_cast<double>(crop_size.width) / crop_size.height;
    if (b.w > aspect * b.h) {
        const double h = b.w / aspect;
        b.y -= 0.5 * (h - b.h);
        b.h = h;
    } else {
        const double w = b.h * aspect;
        b.x -= 0.5 * (w - b.w);
        b.w = w;
    }
    const double s = crop_size.height / b.h;
    Affine2 t;
    t.m = {s, 0.0, -b.x * s, 0.0, s, -b.y * s};
    return t;
}

torch::Tensor mat_to_tensor(const cv::Mat& image) {
    CV_Assert(image.type() == CV_8UC3);
    cv::Mat contiguous = image.isContinuous() ? image : image.clone();
    auto t = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols, 3}, torch::kUInt8);
    return t.permute({2, 0, 1}).to(torch::kFloat32).div_(255.0).contiguous();
}

torch::Tensor warp_to_tensor(const cv::Mat& frame, const Affine2& t, CropSize crop_size) {
    cv::Mat m(2, 3, CV_64F);
    for (int i = 0; i < 6; ++i) {
        m.at<double>(i / 3, i % 3) = t.m[static_cast<std::size_t>(i)];
    }
    cv::Mat out;
    cv::warpAffine(frame, out, m, cv::Size(crop_size.width, crop_size.height), cv::INTER_LINEAR,
                   cv::BORDER_CONSTANT, cv::Scalar::all(0));
    return mat_to_tensor(out);
}

std::pair<int, int> triplet_neighbors(int num_frames, int key_index, TripletMode mode,
                                      const LabelSchedule& schedule, bool strict_neighbors) {
    if (key_index < 0 || key_index >= num_frames) {
        throw InvalidArgument("key_index out of range");
    }
    if (mode == TripletMode::estimation) {
        return {std::max(0, key_index - 1), std::min(num_frames - 1, key_index + 1)};
    }
    if (schedule.labeled_indices.empty()) {
        throw InvalidState("propagation triplet requires at least one labeled frame");
    }
    auto left = schedule.labeled_at_or_before(key_index, strict_neighbors);
    auto right = schedule.labeled_at_or_after(key_index, strict_neighbors);
    if (left && *left >= num_frames) left.reset();
    if (right && *right >= num_frames) right.reset();
    if (!left && !right) {
        return {key_index, key_index};
    }
    if (!left) left = right;
    if (!right) right = left;
    return {*left, *right};
}

FrameTriplet crop_triplet(const SyntheticVideo& video, int key_index, TripletMode mode,
                          const LabelSchedule& schedule, CropSize crop_size, bool strict_neighbors) {
    const auto [left, right] = triplet_neighbors(video.num_frames(), key_index, mode, schedule, strict_neighbors);
    FrameTriplet tri;
    tri.key_index = key_index;
    tri.left_index = left;
    tri.right_index = right;
    tri.key_box = video.gt_boxes[static_cast<std::size_t>(key_index)];
    tri.crop_transform = crop_transform_for(tri.key_box, crop_size);
    tri.key_image = warp_to_tensor(video.frames[static_cast<std::size_t>(key_index)], tri.crop_transform, crop_size);
    tri.left_image = warp_to_tensor(video.frames[static_cast<std::size_t>(left)], tri.crop_transform, crop_size);
    tri.right_image = warp_to_tensor(video.frames[static_cast<std::size_t>(right)], tri.crop_transform, crop_size);
    if (mode == TripletMode::propagation) {
        tri.left_annotation = transform_pose(video.gt_poses[static_cast<std::size_t>(left)], tri.crop_transform);
        tri.right_annotation = transform_pose(video.gt_poses[static_cast<std::size_t>(right)], tri.crop_transform);
    }
    return tri;
}

}  // namespace stdpose
