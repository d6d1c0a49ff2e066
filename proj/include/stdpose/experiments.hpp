// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stdpose/evalx.hpp"
#include "stdpose/trainer.hpp"

namespace stdpose {

/// Everything a seeded trend experiment needs. The benchmark provides the
/// train / val splits; the pretraining corpus is an independent set of
/// fully labeled videos used only to initialize backbone and head.
struct HarnessConfig {
    DataConfig data;
    DataConfig pretrain_data;
    ModelConfig model;
    PretrainConfig pretrain;
    TrainConfig train;                 // propagation-mode settings
    TrainConfig estimation_train;      // settings for estimation-mode runs
    EvalOptions eval;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    void validate() const;
    Json to_json() const;
};

/// Small settings that finish on one CPU core in reasonable time.
HarnessConfig desk_scale_harness();

/// Lazily generated datasets and cached pretraining / training runs keyed by
/// their full configuration, so experiments sharing a run train it once.
class ExperimentContext {
public:
    explicit ExperimentContext(HarnessConfig config);

    const HarnessConfig& config() const { return config_; }
    const Dataset& benchmark();
    const Dataset& corpus();

    PoseModel& pretrained(std::uint64_t seed);

    /// Trains (or returns the cached) model for flags / config / seed on the
    /// given training data (the benchmark when null). data_tag identifies the
    /// data in the cache key.
    TrainResult& train(const ComponentFlags& flags, const TrainConfig& config, const ModelConfig& model,
                       std::uint64_t seed, const Dataset* data = nullptr, const std::string& data_tag = "benchmark");

    /// Called with a one-line progress message after each run.
    void set_progress(std::function<void(const std::string&)> fn) { progress_ = std::move(fn); }
    void note(const std::string& message) const;

private:
    HarnessConfig config_;
    std::unique_ptr<Dataset> benchmark_, corpus_;
    std::map<std::uint64_t, TrainResult> pretrained_;
    std::map<std::string, TrainResult> runs_;
    std::function<void(const std::string&)> progress_;
};

struct AblationRow {
    std::string label;
    ComponentFlags flags;
    std::vector<double> pck;   // per seed
    double mean = 0.0;
};

struct AblationTable {
    std::vector<std::uint64_t> seeds;
    std::vector<AblationRow> rows;

    const AblationRow& row(const std::string& label) const;
    Json to_json() const;
    std::string to_csv() const;
};

/// Propagation-mode training and evaluation of each variant for each seed.
AblationTable run_ablation(ExperimentContext& ctx, const std::vector<std::pair<std::string, ComponentFlags>>& variants,
                           const std::vector<std::uint64_t>& seeds);

/// Rows a-f of the component ablation.
std::vector<std::pair<std::string, ComponentFlags>> ablation_rows();

struct CurvePoint {
    int interval = 1;
    std::vector<double> pck;
    double mean = 0.0;
};

struct TCurve {
    std::vector<std::uint64_t> seeds;
    std::vector<CurvePoint> points;

    const CurvePoint& at(int interval) const;
    Json to_json() const;
    std::string to_csv() const;
};

/// Full model trained and evaluated in propagation mode at each interval.
TCurve run_t_sweep(ExperimentContext& ctx, const std::vector<int>& intervals, const std::vector<std::uint64_t>& seeds);

struct SigmoidGrid {
    std::uint64_t seed = 0;
    std::vector<double> ks;
    std::vector<double> thetas;
    std::vector<std::vector<double>> pck;   // [theta][k]

    Json to_json() const;
    std::string to_csv() const;
};

SigmoidGrid run_sigmoid_sweep(ExperimentContext& ctx, const std::vector<double>& ks, const std::vector<double>& thetas,
                              std::uint64_t seed);

struct PropagationVsEstimation {
    std::vector<std::uint64_t> seeds;
    std::vector<double> propagation;   // annotations substituted
    std::vector<double> estimation;    // t -/+ 1 neighbours, same frames

    Json to_json() const;
};

/// The full propagation model of each seed scored both ways on the
/// unlabeled frames of the validation split.
PropagationVsEstimation run_propagation_vs_estimation(ExperimentContext& ctx, const std::vector<std::uint64_t>& seeds);

struct PseudoLabelStudy {
    std::vector<std::uint64_t> seeds;
    std::vector<double> supervised;                // fully labeled estimation training
    std::map<int, std::vector<double>> pseudo;     // interval -> per-seed PCK
    std::map<int, double> manual_ratio;

    Json to_json() const;
};

/// Per seed and interval: propagation model on sparse labels, pseudo-labels
/// for the rest, estimation-mode retraining; plus a fully supervised run.
PseudoLabelStudy run_pseudo_label_study(ExperimentContext& ctx, const std::vector<int>& intervals,
                                        const std::vector<std::uint64_t>& seeds);

/// Number of positions where a[i] >= b[i] (or > when strict).
int count_at_least(const std::vector<double>& a, const std::vector<double>& b, bool strict = false);

}  // namespace stdpose
