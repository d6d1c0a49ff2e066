// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include <gtest/gtest.h>

#include "stdpose/core.hpp"
#include "test_util.hpp"

using namespace stdpose;

TEST(LabelSchedule, StrideSevenOverThirtyFrames) {
    const auto s = build_label_schedule(30, 7);
    EXPECT_EQ(s.labeled_indices, (std::vector<int>{0, 7, 14, 21, 28}));
    EXPECT_NEAR(s.ratio, 0.167, 5e-4);
}

TEST(LabelSchedule, StrideTwoLabelsHalf) {
    const auto s = build_label_schedule(30, 2);
    EXPECT_EQ(s.labeled_indices.size(), 15u);
    EXPECT_DOUBLE_EQ(s.ratio, 0.5);
}

TEST(LabelSchedule, SingleFrame) {
    const auto s = build_label_schedule(1, 7);
    EXPECT_EQ(s.labeled_indices, std::vector<int>{0});
    EXPECT_DOUBLE_EQ(s.ratio, 1.0);
}

TEST(LabelSchedule, RejectsNonPositiveInputs) {
    EXPECT_THROW(build_label_schedule(0, 7), InvalidArgument);
    EXPECT_THROW(build_label_schedule(30, 0), InvalidArgument);
    EXPECT_THROW(build_label_schedule(-3, 2), InvalidArgument);
}

TEST(LabelSchedule, RatioSweepMatchesCeilingFormula) {
    for (int n = 1; n <= 100; ++n) {
        for (int T = 1; T <= 20; ++T) {
            const auto s = build_label_schedule(n, T);
            const int expected = (n + T - 1) / T;
            ASSERT_EQ(static_cast<int>(s.labeled_indices.size()), expected) << n << " " << T;
            ASSERT_DOUBLE_EQ(s.ratio, static_cast<double>(expected) / n);
            ASSERT_EQ(s.labeled_indices.front(), 0);
            for (int i : s.labeled_indices) {
                ASSERT_EQ(i % T, 0);
                ASSERT_LT(i, n);
            }
        }
    }
}

TEST(LabelSchedule, NeighbourQueries) {
    const auto s = build_label_schedule(30, 7);
    EXPECT_EQ(s.labeled_at_or_before(10), 7);
    EXPECT_EQ(s.labeled_at_or_after(10), 14);
    EXPECT_EQ(s.labeled_at_or_before(14), 14);
    EXPECT_EQ(s.labeled_at_or_before(14, true), 7);
    EXPECT_EQ(s.labeled_at_or_after(14, true), 21);
    EXPECT_FALSE(s.labeled_at_or_after(29).has_value());
    EXPECT_FALSE(s.labeled_at_or_before(0, true).has_value());
}

TEST(LabelSchedule, JsonRoundTrip) {
    const auto s = build_label_schedule(23, 4);
    const auto r = LabelSchedule::from_json(s.to_json());
    EXPECT_EQ(r.labeled_indices, s.labeled_indices);
    EXPECT_EQ(r.num_frames, 23);
    EXPECT_EQ(r.interval, 4);
}

TEST(ExpandBBox, ScalesAboutCenter) {
    const auto b = expand_bbox({10, 20, 100, 200}, 1.25);
    EXPECT_DOUBLE_EQ(b.x, -2.5);
    EXPECT_DOUBLE_EQ(b.y, -5.0);
    EXPECT_DOUBLE_EQ(b.w, 125.0);
    EXPECT_DOUBLE_EQ(b.h, 250.0);
}

TEST(ExpandBBox, IdentityAndDoubling) {
    const auto same = expand_bbox({0, 0, 8, 8}, 1.0);
    EXPECT_DOUBLE_EQ(same.x, 0.0);
    EXPECT_DOUBLE_EQ(same.w, 8.0);
    const auto twice = expand_bbox({0, 0, 4, 4}, 2.0);
    EXPECT_DOUBLE_EQ(twice.x, -2.0);
    EXPECT_DOUBLE_EQ(twice.y, -2.0);
    EXPECT_DOUBLE_EQ(twice.w, 8.0);
    EXPECT_DOUBLE_EQ(twice.h, 8.0);
}

TEST(ExpandBBox, RejectsShrinking) {
    EXPECT_THROW(expand_bbox({0, 0, 4, 4}, 0.9), InvalidArgument);
}

TEST(ExpandBBox, PreservesCenter) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-500.0, 500.0), s(0.5, 300.0), f(1.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const BBox b{u(rng), u(rng), s(rng), s(rng)};
        const auto e = expand_bbox(b, f(rng));
        ASSERT_NEAR(e.center_x(), b.center_x(), 1e-9);
        ASSERT_NEAR(e.center_y(), b.center_y(), 1e-9);
    }
}

TEST(FlipPose, MirrorsAndSwapsPartners) {
    const auto spec = SkeletonSpec::default_spec();
    Pose p(spec.joint_count());
    const int left_wrist = 7, right_wrist = 8;
    ASSERT_EQ(spec.joint_names[left_wrist], "left_wrist");
    p.coords[left_wrist] = {10.0, 5.0};
    const auto f = flip_pose(p, spec, 64.0);
    EXPECT_DOUBLE_EQ(f.coords[right_wrist].x, 54.0);
    EXPECT_DOUBLE_EQ(f.coords[right_wrist].y, 5.0);
}

TEST(FlipPose, AxisIsFixed) {
    const auto spec = SkeletonSpec::default_spec();
    Pose p(spec.joint_count());
    for (auto& c : p.coords) c = {32.0, 7.0};
    const auto f = flip_pose(p, spec, 64.0);
    for (const auto& c : f.coords) EXPECT_DOUBLE_EQ(c.x, 32.0);
}

TEST(FlipPose, IsAnInvolution) {
    const auto spec = SkeletonSpec::default_spec();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        auto p = stdpose::testing::random_pose(rng, spec.joint_count(), -20.0, 100.0);
        p.visibility[seed % 15] = Visibility::occluded;
        p.visibility[(seed + 4) % 15] = Visibility::absent;
        const auto back = flip_pose(flip_pose(p, spec, 80.0), spec, 80.0);
        ASSERT_EQ(back.visibility, p.visibility);
        for (int j = 0; j < spec.joint_count(); ++j) {
            ASSERT_NEAR(back.coords[j].x, p.coords[j].x, 1e-12);
            ASSERT_EQ(back.coords[j].y, p.coords[j].y);
        }
    }
}

TEST(SkeletonSpec, DefaultHasFifteenJointsAndIsValid) {
    const auto spec = SkeletonSpec::default_spec();
    EXPECT_EQ(spec.joint_count(), 15);
    EXPECT_NO_THROW(spec.validate());
    EXPECT_EQ(spec.bones.size(), 14u);
}

TEST(SkeletonSpec, FlipPermutationIsInvolution) {
    const auto perm = SkeletonSpec::default_spec().flip_permutation();
    for (std::size_t j = 0; j < perm.size(); ++j) {
        EXPECT_EQ(perm[static_cast<std::size_t>(perm[j])], static_cast<int>(j));
    }
}

TEST(SkeletonSpec, RejectsBrokenLayouts) {
    auto spec = SkeletonSpec::default_spec();
    auto bad = spec;
    bad.flip_pairs.push_back({3, 5});   // 3 already paired
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = spec;
    bad.bones.back() = {0, 99};
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = spec;
    bad.bones.back() = {1, 0};   // cycle, leaves joint 14 disconnected
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(SkeletonSpec, JsonFileRoundTrip) {
    const auto spec = SkeletonSpec::default_spec();
    const auto path = (std::filesystem::temp_directory_path() / "stdpose_skeleton_test.json").string();
    spec.save(path);
    const auto loaded = SkeletonSpec::load(path);
    EXPECT_EQ(loaded.joint_names, spec.joint_names);
    EXPECT_EQ(loaded.flip_pairs, spec.flip_pairs);
    EXPECT_EQ(loaded.bones, spec.bones);
    std::filesystem::remove(path);
}

TEST(SkeletonSpec, ShippedDataFileMatchesDefault) {
    const auto loaded = SkeletonSpec::load(STDPOSE_SOURCE_DIR "/data/skeleton_default.json");
    const auto spec = SkeletonSpec::default_spec();
    EXPECT_EQ(loaded.joint_names, spec.joint_names);
    EXPECT_EQ(loaded.flip_pairs, spec.flip_pairs);
    EXPECT_EQ(loaded.bones, spec.bones);
}

TEST(Pose, JsonRoundTripKeepsVisibility) {
    Pose p(3);
    p.coords = {{1.5, 2.0}, {3.0, -4.25}, {0.0, 0.0}};
    p.visibility = {Visibility::visible, Visibility::occluded, Visibility::absent};
    EXPECT_EQ(Pose::from_json(p.to_json()), p);
}

TEST(Affine2, ComposeAndInverse) {
    Affine2 a;
    a.m = {2.0, 0.5, 3.0, -0.25, 1.5, -7.0};
    Affine2 b;
    b.m = {0.0, -1.0, 4.0, 1.0, 0.0, 2.0};
    const Point2 p{3.0, -2.0};
    const auto ab = a.compose(b).apply(p);
    const auto manual = a.apply(b.apply(p));
    EXPECT_NEAR(ab.x, manual.x, 1e-12);
    EXPECT_NEAR(ab.y, manual.y, 1e-12);
    const auto back = a.inverse().apply(a.apply(p));
    EXPECT_NEAR(back.x, p.x, 1e-12);
    EXPECT_NEAR(back.y, p.y, 1e-12);
}
