// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/experiments.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "stdpose/propagate.hpp"

namespace stdpose {

namespace {

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

void HarnessConfig::validate() const {
    data.validate();
    pretrain_data.validate();
    model.validate();
    pretrain.validate();
    train.validate();
    estimation_train.validate();
    if (seeds.empty()) {
        throw InvalidArgument("harness needs at least one seed");
    }
}

Json HarnessConfig::to_json() const {
    return {{"data", data_config_to_json(data)},
            {"pretrain_data", data_config_to_json(pretrain_data)},
            {"model", model.to_json()},
            {"pretrain", pretrain.to_json()},
            {"train", train.to_json()},
            {"estimation_train", estimation_train.to_json()},
            {"eval", {{"tau", eval.tau}, {"T", eval.interval}}},
            {"seeds", seeds}};
}

HarnessConfig desk_scale_harness() {
    HarnessConfig h;
    h.data.num_train_videos = 200;
    h.data.num_val_videos = 50;
    h.data.scene.image_height = 96;
    h.data.scene.image_width = 96;
    h.data.scene.max_joint_step = 5.0;
    // heavy occlusion and degradation so single frames stay ambiguous
    h.data.scene.num_occluders = 5;
    h.data.scene.occluder_size = 0.5;
    h.data.scene.occluder_frames = 10;
    h.data.scene.blur_probability = 0.3;
    h.data.scene.noise_sigma = 0.08;
    h.data.scene.seed = 2024;
    h.pretrain_data = h.data;
    h.pretrain_data.num_train_videos = 120;
    h.pretrain_data.num_val_videos = 0;
    h.pretrain_data.scene.seed = 777;

    h.model.crop_height = 64;
    h.model.crop_width = 48;

    h.pretrain.epochs = 8;
    h.pretrain.samples_per_video = 8;

    h.train.mode = TrainMode::propagation;
    h.train.epochs = 10;
    h.train.decay_epochs = {6, 8};   // same 60% / 80% breakpoints as 12 / 16 of 20
    h.train.samples_per_video = 4;
    h.train.interval = 7;
    h.estimation_train = h.train;
    h.estimation_train.mode = TrainMode::estimation;
    h.eval.interval = 7;
    return h;
}

ExperimentContext::ExperimentContext(HarnessConfig config) : config_(std::move(config)) {
    config_.validate();
}

void ExperimentContext::note(const std::string& message) const {
    if (progress_) progress_(message);
}

const Dataset& ExperimentContext::benchmark() {
    if (!benchmark_) {
        benchmark_ = std::make_unique<Dataset>(generate_dataset(config_.data));
    }
    return *benchmark_;
}

const Dataset& ExperimentContext::corpus() {
    if (!corpus_) {
        corpus_ = std::make_unique<Dataset>(generate_dataset(config_.pretrain_data));
    }
    return *corpus_;
}

PoseModel& ExperimentContext::pretrained(std::uint64_t seed) {
    auto it = pretrained_.find(seed);
    if (it == pretrained_.end()) {
        const auto start = std::chrono::steady_clock::now();
        PretrainConfig p = config_.pretrain;
        p.seed = seed;
        it = pretrained_.emplace(seed, pretrain_backbone(corpus(), config_.model, p)).first;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto epochs = it->second.log.phase("pretrain_epoch");
        note("pretrain seed=" + std::to_string(seed) + " final l_h=" +
             fmt(epochs.empty() ? 0.0 : epochs.back().at("l_h").get<double>()) + " (" + fmt(secs) + " s)");
    }
    return it->second.model;
}

TrainResult& ExperimentContext::train(const ComponentFlags& flags, const TrainConfig& config, const ModelConfig& model,
                                      std::uint64_t seed, const Dataset* data, const std::string& data_tag) {
    TrainConfig c = config;
    c.seed = seed;
    const std::string key =
        Json{{"flags", flags.to_json()}, {"train", c.to_json()}, {"model", model.to_json()}, {"data", data_tag}}.dump();
    auto it = runs_.find(key);
    if (it != runs_.end()) {
        return it->second;
    }
    PoseModel& init = pretrained(seed);
    const auto start = std::chrono::steady_clock::now();
    TrainResult r = train_model(data ? *data : benchmark(), c, model, flags, &init);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto epochs = r.log.phase("epoch");
    note("train " + flags.describe() + " mode=" + to_string(c.mode) + " T=" + std::to_string(c.interval) +
         " data=" + data_tag + " seed=" + std::to_string(seed) + " final l_h=" +
         fmt(epochs.empty() ? 0.0 : epochs.back().at("l_h").get<double>()) + " (" + fmt(secs) + " s)");
    return runs_.emplace(key, std::move(r)).first->second;
}

std::vector<std::pair<std::string, ComponentFlags>> ablation_rows() {
    std::vector<std::pair<std::string, ComponentFlags>> rows;
    for (char c : std::string("abcdef")) {
        rows.emplace_back(std::string(1, c), ComponentFlags::ablation_row(c));
    }
    return rows;
}

const AblationRow& AblationTable::row(const std::string& label) const {
    for (const auto& r : rows) {
        if (r.label == label) return r;
    }
    throw InvalidArgument("no ablation row '" + label + "'");
}

Json AblationTable::to_json() const {
    Json j{{"kind", "ablation"}, {"seeds", seeds}, {"rows", Json::array()}};
    for (const auto& r : rows) {
        j["rows"].push_back({{"label", r.label}, {"flags", r.flags.to_json()}, {"components", r.flags.describe()},
                             {"pck", r.pck}, {"mean_pck", r.mean}});
    }
    return j;
}

std::string AblationTable::to_csv() const {
    std::ostringstream os;
    os << "label,components";
    for (auto s : seeds) os << ",seed_" << s;
    os << ",mean_pck\n";
    for (const auto& r : rows) {
        os << r.label << ',' << r.flags.describe();
        for (double v : r.pck) os << ',' << fmt(v);
        os << ',' << fmt(r.mean) << '\n';
    }
    return os.str();
}

AblationTable run_ablation(ExperimentContext& ctx, const std::vector<std::pair<std::string, ComponentFlags>>& variants,
                           const std::vector<std::uint64_t>& seeds) {
    for (const auto& [label, flags] : variants) {
        flags.validate();
    }
    AblationTable table;
    table.seeds = seeds;
    const auto& h = ctx.config();
    for (const auto& [label, flags] : variants) {
        AblationRow row;
        row.label = label;
        row.flags = flags;
        for (auto seed : seeds) {
            auto& run = ctx.train(flags, h.train, h.model, seed);
            EvalOptions opts = h.eval;
            opts.interval = h.train.interval;
            row.pck.push_back(evaluate(run.model, ctx.benchmark().val, TripletMode::propagation, opts).mean_pck);
        }
        row.mean = mean_of(row.pck);
        table.rows.push_back(std::move(row));
    }
    return table;
}

const CurvePoint& TCurve::at(int interval) const {
    for (const auto& p : points) {
        if (p.interval == interval) return p;
    }
    throw InvalidArgument("no curve point at T=" + std::to_string(interval));
}

Json TCurve::to_json() const {
    Json j{{"kind", "t_sweep"}, {"seeds", seeds}, {"points", Json::array()}};
    for (const auto& p : points) {
        j["points"].push_back({{"T", p.interval}, {"pck", p.pck}, {"mean_pck", p.mean}});
    }
    return j;
}

std::string TCurve::to_csv() const {
    std::ostringstream os;
    os << "T";
    for (auto s : seeds) os << ",seed_" << s;
    os << ",mean_pck\n";
    for (const auto& p : points) {
        os << p.interval;
        for (double v : p.pck) os << ',' << fmt(v);
        os << ',' << fmt(p.mean) << '\n';
    }
    return os.str();
}

TCurve run_t_sweep(ExperimentContext& ctx, const std::vector<int>& intervals, const std::vector<std::uint64_t>& seeds) {
    for (int T : intervals) {
        if (T < 1) throw InvalidArgument("T values must be positive");
    }
    TCurve curve;
    curve.seeds = seeds;
    const auto& h = ctx.config();
    for (int T : intervals) {
        CurvePoint point;
        point.interval = T;
        TrainConfig c = h.train;
        c.interval = T;
        for (auto seed : seeds) {
            EvalOptions opts = h.eval;
            opts.interval = T;
            // T = 1 labels every frame, so evaluation never consults the model
            PoseModel& model = T == 1 ? ctx.pretrained(seed) : ctx.train(ComponentFlags::full(), c, h.model, seed).model;
            point.pck.push_back(evaluate(model, ctx.benchmark().val, TripletMode::propagation, opts).mean_pck);
        }
        point.mean = mean_of(point.pck);
        curve.points.push_back(std::move(point));
    }
    return curve;
}

Json SigmoidGrid::to_json() const {
    return {{"kind", "sigmoid_sweep"}, {"seed", seed}, {"k", ks}, {"theta", thetas}, {"pck", pck}};
}

std::string SigmoidGrid::to_csv() const {
    std::ostringstream os;
    os << "theta";
    for (double k : ks) os << ",k_" << fmt(k);
    os << '\n';
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        os << fmt(thetas[i]);
        for (double v : pck[i]) os << ',' << fmt(v);
        os << '\n';
    }
    return os.str();
}

SigmoidGrid run_sigmoid_sweep(ExperimentContext& ctx, const std::vector<double>& ks, const std::vector<double>& thetas,
                              std::uint64_t seed) {
    for (double k : ks) {
        if (!(k > 0.0)) throw InvalidArgument("sigmoid k values must be positive");
    }
    SigmoidGrid grid;
    grid.seed = seed;
    grid.ks = ks;
    grid.thetas = thetas;
    const auto& h = ctx.config();
    for (double theta : thetas) {
        std::vector<double> row;
        for (double k : ks) {
            ModelConfig m = h.model;
            m.dam.k = k;
            m.dam.theta = theta;
            auto& run = ctx.train(ComponentFlags::full(), h.train, m, seed);
            EvalOptions opts = h.eval;
            opts.interval = h.train.interval;
            row.push_back(evaluate(run.model, ctx.benchmark().val, TripletMode::propagation, opts).mean_pck);
        }
        grid.pck.push_back(std::move(row));
    }
    return grid;
}

Json PropagationVsEstimation::to_json() const {
    return {{"kind", "propagation_vs_estimation"}, {"seeds", seeds}, {"propagation", propagation},
            {"estimation", estimation}};
}

PropagationVsEstimation run_propagation_vs_estimation(ExperimentContext& ctx, const std::vector<std::uint64_t>& seeds) {
    PropagationVsEstimation out;
    out.seeds = seeds;
    const auto& h = ctx.config();
    EvalOptions opts = h.eval;
    opts.interval = h.train.interval;
    opts.unlabeled_only = true;
    for (auto seed : seeds) {
        auto& run = ctx.train(ComponentFlags::full(), h.train, h.model, seed);
        out.propagation.push_back(evaluate(run.model, ctx.benchmark().val, TripletMode::propagation, opts).mean_pck);
        out.estimation.push_back(evaluate(run.model, ctx.benchmark().val, TripletMode::estimation, opts).mean_pck);
    }
    return out;
}

Json PseudoLabelStudy::to_json() const {
    Json pseudo_json = Json::object();
    Json ratio_json = Json::object();
    for (const auto& [T, v] : pseudo) pseudo_json[std::to_string(T)] = v;
    for (const auto& [T, r] : manual_ratio) ratio_json[std::to_string(T)] = r;
    return {{"kind", "pseudo_label"}, {"seeds", seeds}, {"supervised", supervised}, {"pseudo", pseudo_json},
            {"manual_ratio", ratio_json}};
}

PseudoLabelStudy run_pseudo_label_study(ExperimentContext& ctx, const std::vector<int>& intervals,
                                        const std::vector<std::uint64_t>& seeds) {
    PseudoLabelStudy study;
    study.seeds = seeds;
    const auto& h = ctx.config();
    const ComponentFlags flags = ComponentFlags::full();
    EvalOptions opts = h.eval;
    for (auto seed : seeds) {
        auto& sup = ctx.train(flags, h.estimation_train, h.model, seed);
        study.supervised.push_back(evaluate(sup.model, ctx.benchmark().val, TripletMode::estimation, opts).mean_pck);
    }
    for (int T : intervals) {
        const Dataset sparse = sparsify_labels(ctx.benchmark(), T);
        const std::string sparse_tag = "sparse_T" + std::to_string(T);
        TrainConfig prop = h.train;
        prop.interval = T;
        for (auto seed : seeds) {
            auto& prop_run = ctx.train(flags, prop, h.model, seed, &sparse, sparse_tag);
            const Dataset pseudo = build_pseudo_dataset(prop_run.model, sparse, T);
            study.manual_ratio[T] = pseudo.manual_ratio();
            auto& est = ctx.train(flags, h.estimation_train, h.model, seed, &pseudo,
                                  "pseudo_T" + std::to_string(T) + "_seed" + std::to_string(seed));
            study.pseudo[T].push_back(evaluate(est.model, ctx.benchmark().val, TripletMode::estimation, opts).mean_pck);
        }
    }
    return study;
}

int count_at_least(const std::vector<double>& a, const std::vector<double>& b, bool strict) {
    if (a.size() != b.size()) {
        throw InvalidArgument("count_at_least: sequences differ in length");
    }
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        n += strict ? a[i] > b[i] : a[i] >= b[i];
    }
    return n;
}

}  // namespace stdpose
