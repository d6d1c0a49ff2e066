// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace stdpose {

std::vector<int> SkeletonSpec::flip_permutation() const {
    std::vector<int> perm(joint_names.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (const auto& [l, r] : flip_pairs) {
        perm[static_cast<std::size_t>(l)] = r;
        perm[static_cast<std::size_t>(r)] = l;
    }
    return perm;
}

void SkeletonSpec::validate() const {
    const int n = joint_count();
    if (n <= 0) {
        throw InvalidArgument("skeleton must have at least one joint");
    }
    auto in_range = [n](int i) { return i >= 0 && i < n; };

    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& [l, r] : flip_pairs) {
        if (!in_range(l) || !in_range(r) || l == r) {
            throw InvalidArgument("flip pair index out of range or self-paired");
        }
        if (seen[static_cast<std::size_t>(l)]++ || seen[static_cast<std::size_t>(r)]++) {
            throw InvalidArgument("joint appears in more than one flip pair");
        }
    }

    if (static_cast<int>(bones.size()) != n - 1) {
        throw InvalidArgument("bones must form a tree: expected " + std::to_string(n - 1) +
                              " bones, got " + std::to_string(bones.size()));
    }
    // union-find over the bone edges; a tree with n-1 edges is connected iff acyclic
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            i = parent[static_cast<std::size_t>(i)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        }
        return i;
    };
    for (const auto& [a, b] : bones) {
        if (!in_range(a) || !in_range(b)) {
            throw InvalidArgument("bone index out of range");
        }
        const int ra = find(a);
        const int rb = find(b);
        if (ra == rb) {
            throw InvalidArgument("bones contain a cycle");
        }
        parent[static_cast<std::size_t>(ra)] = rb;
    }
}

SkeletonSpec SkeletonSpec::default_spec() {
    SkeletonSpec s;
    s.joint_names = {"nose",       "head_bottom", "head_top",   "left_shoulder", "right_shoulder",
                     "left_elbow", "right_elbow", "left_wrist", "right_wrist",   "left_hip",
                     "right_hip",  "left_knee",   "right_knee", "left_ankle",    "right_ankle"};
    s.flip_pairs = {{3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}};
    s.bones = {{1, 0}, {0, 2},  {1, 3},   {1, 4},   {3, 5},   {5, 7},   {4, 6},
               {6, 8}, {1, 9}, {1, 10}, {9, 11}, {11, 13}, {10, 12}, {12, 14}};
    return s;
}

Json SkeletonSpec::to_json() const {
    Json j;
    j["joint_names"] = joint_names;
    j["flip_pairs"] = Json::array();
    for (const auto& [l, r] : flip_pairs) {
        j["flip_pairs"].push_back({l, r});
    }
    j["bones"] = Json::array();
    for (const auto& [a, b] : bones) {
        j["bones"].push_back({a, b});
    }
    return j;
}

SkeletonSpec SkeletonSpec::from_json(const Json& j) {
    SkeletonSpec s;
    try {
        s.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        for (const auto& p : j.at("flip_pairs")) {
            s.flip_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        }
        for (const auto& b : j.at("bones")) {
            s.bones.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
        }
    } catch (const Json::exception& e) {
        throw InvalidArgument(std::string("malformed skeleton document: ") + e.what());
    }
    s.validate();
    return s;
}

SkeletonSpec SkeletonSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open skeleton file " + path);
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw InvalidArgument("skeleton file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void SkeletonSpec::save(const std::string& path) const {
    std::ofstream out(path);
    out << to_json().dump(2) << '\n';
}

std::string to_string(Visibility v) {
    switch (v) {
        case Visibility::visible: return "visible";
        case Visibility::occluded: return "occluded";
        case Visibility::absent: return "absent";
    }
    return "absent";
}

Visibility visibility_from_string(const std::string& s) {
    if (s == "visible") return Visibility::visible;
    if (s == "occluded") return Visibility::occluded;
    if (s == "absent") return Visibility::absent;
    throw InvalidArgument("unknown visibility '" + s + "'");
}

bool Pose::operator==(const Pose& other) const {
    if (coords.size() != other.coords.size() || visibility != other.visibility) {
        return false;
    }
    for (std::size_t j = 0; j < coords.size(); ++j) {
        if (coords[j].x != other.coords[j].x || coords[j].y != other.coords[j].y) {
            return false;
        }
    }
    return true;
}

Json Pose::to_json() const {
    Json arr = Json::array();
    for (std::size_t j = 0; j < coords.size(); ++j) {
        arr.push_back({coords[j].x, coords[j].y, to_string(visibility[j])});
    }
    return arr;
}

Pose Pose::from_json(const Json& j) {
    Pose p;
    for (const auto& e : j) {
        p.coords.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
        p.visibility.push_back(visibility_from_string(e.at(2).get<std::string>()));
    }
    return p;
}

bool LabelSchedule::is_labeled(int frame) const {
    return std::binary_search(labeled_indices.begin(), labeled_indices.end(), frame);
}

std::optional<int> LabelSchedule::labeled_at_or_before(int frame, bool strict) const {
    auto it = strict ? std::lower_bound(labeled_indices.begin(), labeled_indices.end(), frame)
                     : std::upper_bound(labeled_indices.begin(), labeled_indices.end(), frame);
    if (it == labeled_indices.begin()) {
        return std::nullopt;
    }
    return *std::prev(it);
}

std::optional<int> LabelSchedule::labeled_at_or_after(int frame, bool strict) const {
    auto it = strict ? std::upper_bound(labeled_indices.begin(), labeled_indices.end(), frame)
                     : std::lower_bound(labeled_indices.begin(), labeled_indices.end(), frame);
    if (it == labeled_indices.end()) {
        return std::nullopt;
    }
    return *it;
}

Json LabelSchedule::to_json() const {
    return {{"num_frames", num_frames},
            {"interval_T", interval},
            {"labeled_indices", labeled_indices},
            {"ratio", ratio}};
}

LabelSchedule LabelSchedule::from_json(const Json& j) {
    return build_label_schedule(j.at("num_frames").get<int>(), j.at("interval_T").get<int>());
}

LabelSchedule build_label_schedule(int num_frames, int interval) {
    if (num_frames < 1) {
        throw InvalidArgument("num_frames must be >= 1");
    }
    if (interval < 1) {
        throw InvalidArgument("interval_T must be >= 1");
    }
    LabelSchedule s;
    s.num_frames = num_frames;
    s.interval = interval;
    for (int i = 0; i < num_frames; i += interval) {
        s.labeled_indices.push_back(i);
    }
    s.ratio = static_cast<double>(s.labeled_indices.size()) / static_cast<double>(num_frames);
    return s;
}

BBox expand_bbox(const BBox& box, double factor) {
    if (!(factor >= 1.0)) {
        throw InvalidArgument("expansion factor must be >= 1");
    }
    const double cx = box.center_x();
    const double cy = box.center_y();
    const double w = box.w * factor;
    const double h = box.h * factor;
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
}

Pose flip_pose(const Pose& pose, const SkeletonSpec& spec, double image_width) {
    const auto perm = spec.flip_permutation();
    Pose out(pose.size());
    for (int j = 0; j < pose.size(); ++j) {
        const auto dst = static_cast<std::size_t>(perm[static_cast<std::size_t>(j)]);
        const auto src = static_cast<std::size_t>(j);
        out.coords[dst] = {image_width - pose.coords[src].x, pose.coords[src].y};
        out.visibility[dst] = pose.visibility[src];
    }
    return out;
}

Point2 Affine2::apply(Point2 p) const {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

Affine2 Affine2::compose(const Affine2& o) const {
    Affine2 r;
    r.m[0] = m[0] * o.m[0] + m[1] * o.m[3];
    r.m[1] = m[0] * o.m[1] + m[1] * o.m[4];
    r.m[2] = m[0] * o.m[2] + m[1] * o.m[5] + m[2];
    r.m[3] = m[3] * o.m[0] + m[4] * o.m[3];
    r.m[4] = m[3] * o.m[1] + m[4] * o.m[4];
    r.m[5] = m[3] * o.m[2] + m[4] * o.m[5] + m[5];
    return r;
}

Affine2 Affine2::inverse() const {
    const double det = m[0] * m[4] - m[1] * m[3];
    if (std::abs(det) < 1e-15) {
        throw InvalidArgument("singular affine transform");
    }
    Affine2 r;
    r.m[0] = m[4] / det;
    r.m[1] = -m[1] / det;
    r.m[3] = -m[3] / det;
    r.m[4] = m[0] / det;
    r.m[2] = -(r.m[0] * m[2] + r.m[1] * m[5]);
    r.m[5] = -(r.m[3] * m[2] + r.m[4] * m[5]);
    return r;
}

double Affine2::scale() const {
    return std::sqrt(std::abs(m[0] * m[4] - m[1] * m[3]));
}

Pose transform_pose(const Pose& pose, const Affine2& t) {
    Pose out = pose;
    for (auto& c : out.coords) {
        c = t.apply(c);
    }
    return out;
}

}  // namespace stdpose
