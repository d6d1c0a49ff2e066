// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "stdpose/experiments.hpp"
#include "stdpose/heatmaps.hpp"
#include "stdpose/propagate.hpp"
#include "test_util.hpp"
#include "trainer_fixtures.hpp"

using namespace stdpose;
using namespace stdpose::testing;

namespace {

Pose two_joints(Point2 a, Point2 b) {
    Pose p(2);
    p.coords = {a, b};
    return p;
}

HeatmapPredictor oracle_predictor(const RenderParams& rp) {
    return [rp](const SyntheticVideo& video, const std::vector<FrameTriplet>& triplets) {
        std::vector<Pose> poses;
        for (const auto& t : triplets) {
            poses.push_back(transform_pose(video.gt_poses[static_cast<std::size_t>(t.key_index)], t.crop_transform));
        }
        return render_heatmap_batch(poses, rp);
    };
}

HeatmapPredictor centre_predictor(const RenderParams& rp, int joints) {
    return [rp, joints](const SyntheticVideo&, const std::vector<FrameTriplet>& triplets) {
        Pose centre(joints);
        for (auto& c : centre.coords) c = {rp.width * rp.stride / 2.0, rp.height * rp.stride / 2.0};
        return render_heatmap_batch(std::vector<Pose>(triplets.size(), centre), rp);
    };
}

}  // namespace

TEST(PCK, ReferenceCases) {
    const BBox box{0, 0, 40, 20};
    const auto gt = two_joints({10, 10}, {20, 10});
    auto flags = pck(gt, gt, box, 0.1);
    EXPECT_EQ(pck_ratio(flags), 1.0);
    flags = pck(two_joints({10, 10}, {30, 10}), gt, box, 0.1);
    EXPECT_EQ(pck_ratio(flags), 0.5);
    // exactly tau * max(w, h) away is still correct
    flags = pck(two_joints({14, 10}, {20, 6}), gt, box, 0.1);
    EXPECT_TRUE(*flags[0] && *flags[1]);
    flags = pck(two_joints({14.0001, 10}, {20, 10}), gt, box, 0.1);
    EXPECT_FALSE(*flags[0]);
}

TEST(PCK, AbsentJointsAreExcluded) {
    const BBox box{0, 0, 40, 20};
    auto gt = two_joints({10, 10}, {20, 10});
    gt.visibility[1] = Visibility::absent;
    const auto flags = pck(two_joints({10, 10}, {90, 90}), gt, box, 0.1);
    EXPECT_FALSE(flags[1].has_value());
    EXPECT_EQ(pck_ratio(flags), 1.0);
    auto pred = gt;
    pred.visibility[0] = Visibility::absent;
    EXPECT_FALSE(*pck(pred, gt, box, 0.1)[0]);
    gt.visibility[0] = Visibility::absent;
    EXPECT_FALSE(pck_ratio(pck(pred, gt, box, 0.1)).has_value());
}

TEST(PCK, TranslationInvariant) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const auto gt = random_pose(rng, 15, 0.0, 100.0);
        const auto pred = random_pose(rng, 15, 0.0, 100.0);
        const BBox box{5, 5, 60, 80};
        std::uniform_real_distribution<double> u(-500.0, 500.0);
        const double dx = u(rng), dy = u(rng);
        auto shift = [&](Pose p) {
            for (auto& c : p.coords) c = {c.x + dx, c.y + dy};
            return p;
        };
        ASSERT_EQ(pck(pred, gt, box, 0.2), pck(shift(pred), shift(gt), BBox{5 + dx, 5 + dy, 60, 80}, 0.2));
    }
}

TEST(EvalReport, MeanOfJointsAndJsonRoundTrip) {
    PCKAccumulator acc(SkeletonSpec::default_spec());
    std::mt19937_64 rng(2);
    for (int i = 0; i < 30; ++i) {
        acc.add(random_pose(rng, 15, 0.0, 50.0), random_pose(rng, 15, 0.0, 50.0), {0, 0, 50, 50}, 0.3);
    }
    const auto r = acc.report(0.3);
    double sum = 0.0;
    for (const auto& [name, v] : r.per_joint_pck) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
    }
    EXPECT_EQ(r.mean_pck, sum / static_cast<double>(r.per_joint_pck.size()));
    EXPECT_EQ(r.num_frames, 30);
    EXPECT_EQ(EvalReport::from_json(r.to_json()).to_json(), r.to_json());
}

TEST(EvaluationFrames, UnlabeledOnlySkipsTheSchedule) {
    EvalOptions o;
    EXPECT_EQ(evaluation_frames(30, o).size(), 30u);
    o.unlabeled_only = true;
    const auto frames = evaluation_frames(30, o);
    EXPECT_EQ(frames.size(), 25u);
    for (int t : frames) EXPECT_NE(t % 7, 0);
}

TEST(Evaluate, OracleHeatmapsScorePerfectly) {
    const auto ds = generate_dataset(tiny_data(0, 3));
    const auto m = tiny_model();
    for (auto mode : {TripletMode::estimation, TripletMode::propagation}) {
        const auto r = evaluate_predictor(oracle_predictor(m.render_params()), ds.val, mode, EvalOptions{}, m,
                                          ds.skeleton);
        EXPECT_EQ(r.mean_pck, 1.0);
        EXPECT_EQ(r.num_frames, 36);
    }
}

TEST(Evaluate, ConstantCentreIsAFloor) {
    const auto ds = generate_dataset(tiny_data(0, 5));
    const auto m = tiny_model();
    const auto r = evaluate_predictor(centre_predictor(m.render_params(), 15), ds.val, TripletMode::estimation,
                                      EvalOptions{}, m, ds.skeleton);
    std::cout << "constant-centre mean PCK " << r.mean_pck << "\n";
    EXPECT_LT(r.mean_pck, 0.3);
}

TEST(Evaluate, DeterministicAndRejectsEmptySplits) {
    const auto ds = generate_dataset(tiny_data(0, 2));
    auto model = make_model(tiny_model(), ComponentFlags::full(), 4);
    const auto a = evaluate(model, ds.val, TripletMode::propagation, EvalOptions{});
    const auto b = evaluate(model, ds.val, TripletMode::propagation, EvalOptions{});
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_THROW(evaluate(model, {}, TripletMode::propagation, EvalOptions{}), InvalidState);
}

TEST(Evaluate, SingleFrameIntervalPassesAnnotationsThrough) {
    const auto ds = generate_dataset(tiny_data(0, 2));
    auto model = make_model(tiny_model(), ComponentFlags::full(), 4);
    EvalOptions o;
    o.interval = 1;
    EXPECT_EQ(evaluate(model, ds.val, TripletMode::propagation, o).mean_pck, 1.0);
}

namespace {

HarnessConfig tiny_harness() {
    HarnessConfig h;
    h.data = tiny_data(2, 1, 31);
    h.pretrain_data = tiny_data(2, 0, 32);
    h.model = tiny_model();
    h.pretrain.epochs = 1;
    h.pretrain.samples_per_video = 2;
    h.train = tiny_train();
    h.estimation_train = tiny_train(TrainMode::estimation);
    h.eval.interval = 4;
    h.seeds = {1};
    return h;
}

}  // namespace

TEST(Harness, SingleVariantSingleSeedGivesOneRow) {
    ExperimentContext ctx(tiny_harness());
    const auto table = run_ablation(ctx, {{"a", ComponentFlags::baseline()}}, {1});
    ASSERT_EQ(table.rows.size(), 1u);
    ASSERT_EQ(table.rows[0].pck.size(), 1u);
    EXPECT_EQ(table.row("a").mean, table.rows[0].pck[0]);
    EXPECT_NE(table.to_csv().find("a,"), std::string::npos);
    EXPECT_THROW(run_ablation(ctx, {{"bad", ComponentFlags{true, true, true, false, false}}}, {1}), InvalidArgument);
}

TEST(Harness, SweepsHandleDegenerateInputs) {
    ExperimentContext ctx(tiny_harness());
    const auto curve = run_t_sweep(ctx, {1}, {1});
    ASSERT_EQ(curve.points.size(), 1u);
    EXPECT_EQ(curve.at(1).mean, 1.0);
    const auto grid = run_sigmoid_sweep(ctx, {1.5}, {0.5}, 1);
    ASSERT_EQ(grid.pck.size(), 1u);
    ASSERT_EQ(grid.pck[0].size(), 1u);
    EXPECT_THROW(run_sigmoid_sweep(ctx, {0.0}, {0.5}, 1), InvalidArgument);
    EXPECT_THROW(run_t_sweep(ctx, {0}, {1}), InvalidArgument);
}

TEST(Harness, RunsAreCachedAndReproducible) {
    ExperimentContext a(tiny_harness()), b(tiny_harness());
    const auto ta = run_ablation(a, {{"f", ComponentFlags::full()}}, {1});
    const auto again = run_ablation(a, {{"f", ComponentFlags::full()}}, {1});
    const auto tb = run_ablation(b, {{"f", ComponentFlags::full()}}, {1});
    EXPECT_EQ(ta.rows[0].pck, again.rows[0].pck);
    EXPECT_NEAR(ta.rows[0].pck[0], tb.rows[0].pck[0], 1e-6);
}

TEST(Harness, CountAtLeast) {
    EXPECT_EQ(count_at_least({1, 2, 3}, {1, 3, 2}), 2);
    EXPECT_EQ(count_at_least({1, 2, 3}, {1, 3, 2}, true), 1);
}
