// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <opencv2/imgproc.hpp>

#include "stdpose/evalx.hpp"
#include "stdpose/json_schema.hpp"

namespace stdpose {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void read_augment(StrictObject& o, AugmentConfig& a) {
    o.read("enabled", a.enabled);
    o.read("rotation_min", a.rotation_min);
    o.read("rotation_max", a.rotation_max);
    o.read("scale_min", a.scale_min);
    o.read("scale_max", a.scale_max);
    o.read("flip_prob", a.flip_prob);
    o.read("half_body_prob", a.half_body_prob);
    o.finish();
}

}  // namespace

void AugmentConfig::validate() const {
    if (!(rotation_min <= rotation_max) || !(scale_min <= scale_max) || scale_min <= 0.0) {
        throw InvalidArgument("augmentation ranges must be ordered and scale positive");
    }
    if (flip_prob < 0.0 || flip_prob > 1.0 || half_body_prob < 0.0 || half_body_prob > 1.0) {
        throw InvalidArgument("augmentation probabilities must lie in [0, 1]");
    }
}

Json AugmentConfig::to_json() const {
    return {{"enabled", enabled},       {"rotation_min", rotation_min}, {"rotation_max", rotation_max},
            {"scale_min", scale_min},   {"scale_max", scale_max},       {"flip_prob", flip_prob},
            {"half_body_prob", half_body_prob}};
}

AugmentConfig AugmentConfig::from_json(const Json& j, const std::string& path) {
    AugmentConfig a;
    StrictObject o(j, path);
    read_augment(o, a);
    return a;
}

std::string to_string(TrainMode m) {
    return m == TrainMode::propagation ? "propagation" : "estimation";
}

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "propagation") return TrainMode::propagation;
    if (s == "estimation") return TrainMode::estimation;
    throw InvalidArgument("mode must be 'propagation' or 'estimation', got '" + s + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
    if (!(base_lr > 0.0)) throw InvalidArgument("base_lr must be positive");
    if (decay_factor < 1.0) throw InvalidArgument("decay_factor must be at least 1");
    if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
    if (weight_decay < 0.0) throw InvalidArgument("weight_decay must be non-negative");
    if (interval < 1) throw InvalidArgument("interval must be at least 1");
    if (estimator_lr_multiplier <= 0.0) throw InvalidArgument("estimator_lr_multiplier must be positive");
    if (val_tau <= 0.0) throw InvalidArgument("val_tau must be positive");
    for (int e : decay_epochs) {
        if (e < 0) throw InvalidArgument("decay epochs must be non-negative");
    }
    augmentation.validate();
    weights.validate();
}

Json TrainConfig::to_json() const {
    return {{"mode", to_string(mode)},
            {"epochs", epochs},
            {"base_lr", base_lr},
            {"decay_epochs", decay_epochs},
            {"decay_factor", decay_factor},
            {"batch_size", batch_size},
            {"weight_decay", weight_decay},
            {"seed", seed},
            {"augmentation", augmentation.to_json()},
            {"weights", {{"alpha", weights.alpha}, {"beta", weights.beta}}},
            {"T", interval},
            {"samples_per_video", samples_per_video},
            {"freeze_backbone", freeze_backbone},
            {"estimator_lr_multiplier", estimator_lr_multiplier},
            {"val_every", val_every},
            {"val_tau", val_tau}};
}

TrainConfig TrainConfig::from_json(const Json& j, const std::string& path) {
    TrainConfig c;
    StrictObject o(j, path);
    std::string mode = to_string(c.mode);
    o.read("mode", mode);
    try {
        c.mode = train_mode_from_string(mode);
    } catch (const InvalidArgument& e) {
        throw SchemaError(o.qualify("mode"), e.what());
    }
    o.read("epochs", c.epochs);
    o.read("base_lr", c.base_lr);
    o.read("decay_epochs", c.decay_epochs);
    o.read("decay_factor", c.decay_factor);
    o.read("batch_size", c.batch_size);
    o.read("weight_decay", c.weight_decay);
    o.read("seed", c.seed);
    if (auto a = o.child("augmentation")) read_augment(*a, c.augmentation);
    if (auto w = o.child("weights")) {
        w->read("alpha", c.weights.alpha);
        w->read("beta", c.weights.beta);
        w->finish();
    }
    o.read("T", c.interval);
    o.read("samples_per_video", c.samples_per_video);
    o.read("freeze_backbone", c.freeze_backbone);
    o.read("estimator_lr_multiplier", c.estimator_lr_multiplier);
    o.read("val_every", c.val_every);
    o.read("val_tau", c.val_tau);
    o.finish();
    return c;
}

void PretrainConfig::validate() const {
    if (epochs < 0) throw InvalidArgument("pretrain epochs must be non-negative");
    if (!(lr > 0.0)) throw InvalidArgument("pretrain lr must be positive");
    if (batch_size < 1) throw InvalidArgument("pretrain batch_size must be at least 1");
    augmentation.validate();
}

Json PretrainConfig::to_json() const {
    return {{"epochs", epochs},
            {"lr", lr},
            {"batch_size", batch_size},
            {"samples_per_video", samples_per_video},
            {"weight_decay", weight_decay},
            {"seed", seed},
            {"augmentation", augmentation.to_json()}};
}

PretrainConfig PretrainConfig::from_json(const Json& j, const std::string& path) {
    PretrainConfig c;
    StrictObject o(j, path);
    o.read("epochs", c.epochs);
    o.read("lr", c.lr);
    o.read("batch_size", c.batch_size);
    o.read("samples_per_video", c.samples_per_video);
    o.read("weight_decay", c.weight_decay);
    o.read("seed", c.seed);
    if (auto a = o.child("augmentation")) read_augment(*a, c.augmentation);
    o.finish();
    return c;
}

torch::Tensor heatmap_loss(const torch::Tensor& pred, const torch::Tensor& gt) {
    if (!pred.sizes().equals(gt.sizes())) {
        throw InvalidArgument("heatmap_loss: prediction and target shapes differ");
    }
    return (pred - gt).square().mean();
}

double heatmap_loss(const HeatmapStack& pred, const HeatmapStack& gt) {
    return heatmap_loss(pred.values.to(torch::kFloat64), gt.values.to(torch::kFloat64)).item<double>();
}

double total_loss(double l_h, double l_mi) {
    return l_h + l_mi;
}

torch::Tensor total_loss(const torch::Tensor& l_h, const torch::Tensor& l_mi) {
    return l_h + l_mi;
}

double lr_at_epoch(int epoch, const TrainConfig& config) {
    if (epoch < 0) {
        throw InvalidArgument("epoch must be non-negative");
    }
    int steps = 0;
    for (int e : config.decay_epochs) {
        if (epoch >= e) ++steps;
    }
    // one division keeps 2e-4 / 10^2 exactly 2e-6
    return config.base_lr / std::pow(config.decay_factor, steps);
}

Affine2 draw_augmentation(const AugmentConfig& config, std::uint64_t seed, CropSize crop, bool* flipped,
                          const Pose* half_body_pose, const SkeletonSpec* skeleton) {
    if (flipped) *flipped = false;
    if (!config.enabled) {
        return Affine2::identity();
    }
    std::mt19937_64 rng(mix_seed(seed, 0xA5A5));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double rot = config.rotation_min + (config.rotation_max - config.rotation_min) * unit(rng);
    const double scale = config.scale_min + (config.scale_max - config.scale_min) * unit(rng);
    const bool flip = unit(rng) < config.flip_prob;
    const bool half = unit(rng) < config.half_body_prob;
    const bool upper = unit(rng) < 0.5;

    const double cx = 0.5 * crop.width;
    const double cy = 0.5 * crop.height;
    Affine2 pre = Affine2::identity();
    if (half && half_body_pose && skeleton) {
        double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
        int n = 0;
        for (std::size_t j = 0; j < skeleton->joint_names.size(); ++j) {
            const auto& name = skeleton->joint_names[j];
            const bool is_lower = name.find("hip") != std::string::npos || name.find("knee") != std::string::npos ||
                                  name.find("ankle") != std::string::npos;
            if (is_lower == upper || !half_body_pose->present(static_cast<int>(j))) continue;
            const auto p = half_body_pose->coords[j];
            x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
            ++n;
        }
        if (n >= 2) {
            const double w = std::max(1.5 * (x1 - x0), 4.0);
            const double h = std::max(1.5 * (y1 - y0), 4.0);
            const double z = std::min({crop.width / w, crop.height / h, 2.0});
            const double bx = 0.5 * (x0 + x1), by = 0.5 * (y0 + y1);
            pre.m = {z, 0.0, cx - z * bx, 0.0, z, cy - z * by};
        }
    }
    const double a = rot * std::numbers::pi / 180.0;
    const double c = std::cos(a) * scale, s = std::sin(a) * scale;
    Affine2 rs;
    rs.m = {c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy};
    Affine2 t = rs.compose(pre);
    if (flip) {
        Affine2 f;
        f.m = {-1.0, 0.0, static_cast<double>(crop.width), 0.0, 1.0, 0.0};
        t = f.compose(t);
        if (flipped) *flipped = true;
    }
    return t;
}

namespace {

torch::Tensor warp_crop(const torch::Tensor& image, const Affine2& t) {
    const auto chw = image.contiguous().to(torch::kFloat32);
    const int H = static_cast<int>(chw.size(1));
    const int W = static_cast<int>(chw.size(2));
    auto hwc = chw.permute({1, 2, 0}).contiguous();
    cv::Mat src(H, W, CV_32FC3, hwc.data_ptr<float>());
    cv::Mat m(2, 3, CV_64F);
    for (int i = 0; i < 6; ++i) m.at<double>(i / 3, i % 3) = t.m[static_cast<std::size_t>(i)];
    cv::Mat dst;
    cv::warpAffine(src, dst, m, src.size(), cv::INTER_LINEAR, cv::BORDER_CONSTANT, cv::Scalar::all(0));
    return torch::from_blob(dst.data, {H, W, 3}, torch::kFloat32).permute({2, 0, 1}).clone();
}

Pose map_pose(const Pose& p, const Affine2& t, bool flipped, const SkeletonSpec& skeleton) {
    Pose out = transform_pose(p, t);
    if (flipped) {
        const auto perm = skeleton.flip_permutation();
        Pose swapped = out;
        for (std::size_t j = 0; j < perm.size(); ++j) {
            swapped.coords[j] = out.coords[static_cast<std::size_t>(perm[j])];
            swapped.visibility[j] = out.visibility[static_cast<std::size_t>(perm[j])];
        }
        out = swapped;
    }
    return out;
}

}  // namespace

std::pair<FrameTriplet, Pose> augment_sample(const FrameTriplet& triplet, const Pose& gt, const AugmentConfig& config,
                                             std::uint64_t seed, const SkeletonSpec& skeleton) {
    config.validate();
    const CropSize crop{static_cast<int>(triplet.key_image.size(1)), static_cast<int>(triplet.key_image.size(2))};
    bool flipped = false;
    const Affine2 t = draw_augmentation(config, seed, crop, &flipped, &gt, &skeleton);
    if (t.m == Affine2::identity().m) {
        return {triplet, gt};
    }
    FrameTriplet out = triplet;
    out.key_image = warp_crop(triplet.key_image, t);
    out.left_image = warp_crop(triplet.left_image, t);
    out.right_image = warp_crop(triplet.right_image, t);
    out.crop_transform = t.compose(triplet.crop_transform);
    if (triplet.left_annotation) out.left_annotation = map_pose(*triplet.left_annotation, t, flipped, skeleton);
    if (triplet.right_annotation) out.right_annotation = map_pose(*triplet.right_annotation, t, flipped, skeleton);
    return {out, map_pose(gt, t, flipped, skeleton)};
}

TrainingSample make_sample(const VideoRecord& record, int key_index, TrainMode mode, int interval, CropSize crop) {
    const int n = record.video.num_frames();
    TrainingSample s;
    if (mode == TrainMode::propagation) {
        const LabelSchedule schedule = record.schedule ? *record.schedule : build_label_schedule(n, interval);
        s.triplet = crop_triplet(record.video, key_index, TripletMode::propagation, schedule, crop, true);
    } else {
        s.triplet = crop_triplet(record.video, key_index, TripletMode::estimation, build_label_schedule(n, 1), crop);
    }
    s.label = transform_pose(record.labels[static_cast<std::size_t>(key_index)], s.triplet.crop_transform);
    return s;
}

std::vector<std::pair<int, int>> epoch_key_frames(const std::vector<VideoRecord>& videos, int samples_per_video,
                                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> keys;
    for (std::size_t v = 0; v < videos.size(); ++v) {
        std::vector<int> frames;
        for (std::size_t t = 0; t < videos[v].label_source.size(); ++t) {
            if (videos[v].label_source[t] != LabelSource::none) frames.push_back(static_cast<int>(t));
        }
        std::shuffle(frames.begin(), frames.end(), rng);
        if (samples_per_video > 0 && static_cast<int>(frames.size()) > samples_per_video) {
            frames.resize(static_cast<std::size_t>(samples_per_video));
        }
        for (int t : frames) keys.emplace_back(static_cast<int>(v), t);
    }
    std::shuffle(keys.begin(), keys.end(), rng);
    return keys;
}

Json StepRecord::to_json() const {
    return {{"phase", phase}, {"epoch", epoch}, {"step", step}, {"l_h", l_h},
            {"l_mi", l_mi},   {"total", total}, {"lr", lr}};
}

std::vector<Json> MetricsLog::phase(const std::string& name) const {
    std::vector<Json> out;
    for (const auto& r : records_) {
        if (r.value("phase", "") == name) out.push_back(r);
    }
    return out;
}

void MetricsLog::write(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        for (const auto& r : records_) out << r.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

MetricsLog MetricsLog::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    MetricsLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) log.add(Json::parse(line));
    }
    return log;
}

Trainer::Trainer(PoseModel model, const TrainConfig& config, const SkeletonSpec& skeleton)
    : model_(std::move(model)), config_(config), skeleton_(skeleton), render_(model_->config().render_params()) {
    config_.validate();
    const auto& flags = model_->flags();
    model_->set_backbone_trainable(!(config_.freeze_backbone && flags.temporal()));
    std::vector<torch::Tensor> params = model_->temporal_parameters();
    if (model_->backbone_trainable()) {
        const auto bb = model_->backbone_parameters();
        params.insert(params.end(), bb.begin(), bb.end());
    }
    optimizer_ = std::make_unique<torch::optim::AdamW>(
        params, torch::optim::AdamWOptions(config_.base_lr).weight_decay(config_.weight_decay));
    mi_active_ = flags.mi && (config_.weights.alpha != 0.0 || config_.weights.beta != 0.0);
    if (mi_active_) {
        MIObjectiveConfig mc;
        mc.seed = mix_seed(config_.seed, 0x4D49);
        objective_ = MutualInformationObjective(model_->config().joints, model_->config().backbone.embed_dim, mc);
        estimator_optimizer_ = std::make_unique<torch::optim::AdamW>(
            objective_->parameters(),
            torch::optim::AdamWOptions(config_.base_lr * config_.estimator_lr_multiplier)
                .weight_decay(config_.weight_decay));
    }
}

StepRecord Trainer::step(const std::vector<TrainingSample>& batch, int epoch) {
    if (batch.empty()) {
        throw InvalidArgument("empty training batch");
    }
    std::vector<torch::Tensor> left, key, right;
    std::vector<Pose> labels, aux_left, aux_right;
    // propagation triplets train on the same annotated auxiliary heatmaps
    // they are evaluated with
    bool annotated = config_.mode == TrainMode::propagation;
    for (const auto& s : batch) {
        left.push_back(s.triplet.left_image);
        key.push_back(s.triplet.key_image);
        right.push_back(s.triplet.right_image);
        labels.push_back(s.label);
        if (annotated && s.triplet.left_annotation && s.triplet.right_annotation) {
            aux_left.push_back(*s.triplet.left_annotation);
            aux_right.push_back(*s.triplet.right_annotation);
        } else {
            annotated = false;
        }
    }
    const auto gt = render_heatmap_batch(labels, render_);
    std::optional<torch::Tensor> hl, hr;
    if (annotated) {
        hl = render_heatmap_batch(aux_left, render_);
        hr = render_heatmap_batch(aux_right, render_);
    }
    const double lr = lr_at_epoch(epoch, config_);
    for (auto& g : optimizer_->param_groups()) {
        static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr);
    }

    model_->train();
    auto out = model_->forward(torch::stack(left), torch::stack(key), torch::stack(right), hl, hr);
    const auto l_h = heatmap_loss(out.final, gt);
    torch::Tensor l_mi = torch::zeros({});
    const bool mi_step = mi_active_ && batch.size() >= 2;
    if (mi_step) {
        l_mi = mi_loss(gt, out.fused, out.features_key, out.merged, out.heatmaps_key, config_.weights, objective_).loss;
    }
    const auto loss = total_loss(l_h, l_mi);

    StepRecord rec;
    rec.phase = "train";
    rec.epoch = epoch;
    rec.step = step_;
    rec.l_h = l_h.item<double>();
    rec.l_mi = l_mi.item<double>();
    rec.total = total_loss(rec.l_h, rec.l_mi);
    rec.lr = lr;
    if (!std::isfinite(rec.total)) {
        throw TrainingDiverged("loss is not finite at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(step_) + " (l_h=" + std::to_string(rec.l_h) +
                               ", l_mi=" + std::to_string(rec.l_mi) + ")");
    }
    optimizer_->zero_grad();
    loss.backward();
    optimizer_->step();

    if (mi_step) {
        for (auto& g : estimator_optimizer_->param_groups()) {
            static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr * config_.estimator_lr_multiplier);
        }
        estimator_optimizer_->zero_grad();
        const auto objective =
            objective_->estimator_objective(gt, out.fused, out.features_key, out.merged, out.heatmaps_key);
        (-objective).backward();
        estimator_optimizer_->step();
    }
    ++step_;
    return rec;
}

namespace {

CropSize crop_of(const ModelConfig& c) {
    return {c.crop_height, c.crop_width};
}

std::vector<TrainingSample> build_batch(const std::vector<VideoRecord>& videos,
                                        const std::vector<std::pair<int, int>>& keys, std::size_t begin,
                                        std::size_t end, TrainMode mode, int interval, CropSize crop,
                                        const AugmentConfig& aug, std::uint64_t seed, const SkeletonSpec& skeleton) {
    std::vector<TrainingSample> batch;
    for (std::size_t i = begin; i < end; ++i) {
        const auto [v, t] = keys[i];
        auto s = make_sample(videos[static_cast<std::size_t>(v)], t, mode, interval, crop);
        auto [tri, label] = augment_sample(s.triplet, s.label, aug, mix_seed(seed, i), skeleton);
        batch.push_back({std::move(tri), std::move(label)});
    }
    return batch;
}

}  // namespace

TrainResult pretrain_backbone(const Dataset& corpus, const ModelConfig& model_config, const PretrainConfig& config) {
    config.validate();
    if (corpus.train.empty()) {
        throw InvalidState("pretraining corpus has no training videos");
    }
    TrainResult result;
    result.model = make_model(model_config, ComponentFlags::baseline(), config.seed);
    auto& model = result.model;
    const auto render = model_config.render_params();
    const CropSize crop = crop_of(model_config);
    torch::optim::AdamW opt(model->parameters(), torch::optim::AdamWOptions(config.lr).weight_decay(config.weight_decay));
    int step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // cosine decay keeps the last epochs stable
        const double lr = config.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / std::max(1, config.epochs)));
        for (auto& g : opt.param_groups()) static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr);
        const auto keys = epoch_key_frames(corpus.train, config.samples_per_video, mix_seed(config.seed, epoch));
        double sum = 0.0;
        int count = 0;
        for (std::size_t b = 0; b < keys.size(); b += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t e = std::min(keys.size(), b + static_cast<std::size_t>(config.batch_size));
            const auto batch = build_batch(corpus.train, keys, b, e, TrainMode::estimation, 1, crop,
                                           config.augmentation, mix_seed(config.seed, 1000003ULL * epoch + b),
                                           corpus.skeleton);
            std::vector<torch::Tensor> images;
            std::vector<Pose> labels;
            for (const auto& s : batch) {
                images.push_back(s.triplet.key_image);
                labels.push_back(s.label);
            }
            model->train();
            const auto loss = heatmap_loss(model->frame_heatmaps(torch::stack(images)), render_heatmap_batch(labels, render));
            const double v = loss.item<double>();
            if (!std::isfinite(v)) {
                throw TrainingDiverged("pretraining loss is not finite at epoch " + std::to_string(epoch));
            }
            opt.zero_grad();
            loss.backward();
            opt.step();
            StepRecord rec{"pretrain", epoch, step++, v, 0.0, v, lr};
            result.log.add(rec);
            sum += v;
            ++count;
        }
        result.log.add(Json{{"phase", "pretrain_epoch"}, {"epoch", epoch}, {"l_h", count ? sum / count : 0.0}, {"lr", lr}});
    }
    return result;
}

TrainResult train_model(const Dataset& dataset, const TrainConfig& config, const ModelConfig& model_config,
                        const ComponentFlags& flags, PoseModel* init) {
    config.validate();
    int labeled = 0;
    for (const auto& r : dataset.train) labeled += r.num_labeled();
    if (dataset.train.empty() || labeled == 0) {
        throw InvalidState("training dataset is empty");
    }
    TrainResult result;
    PoseModel model = make_model(model_config, flags, config.seed);
    if (init) {
        copy_matching_state(model, *init);
    }
    Trainer trainer(model, config, dataset.skeleton);
    const CropSize crop = crop_of(model_config);
    const TripletMode eval_mode =
        config.mode == TrainMode::propagation ? TripletMode::propagation : TripletMode::estimation;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto keys = epoch_key_frames(dataset.train, config.samples_per_video, mix_seed(config.seed, epoch + 1));
        double sum_h = 0.0, sum_mi = 0.0;
        int count = 0;
        for (std::size_t b = 0; b < keys.size(); b += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t e = std::min(keys.size(), b + static_cast<std::size_t>(config.batch_size));
            if (e - b < 2 && count > 0) break;   // a lone trailing sample cannot form MI pairs
            const auto batch = build_batch(dataset.train, keys, b, e, config.mode, config.interval, crop,
                                           config.augmentation, mix_seed(config.seed, 7919ULL * (epoch + 1) + b),
                                           dataset.skeleton);
            const auto rec = trainer.step(batch, epoch);
            result.log.add(rec);
            sum_h += rec.l_h;
            sum_mi += rec.l_mi;
            ++count;
        }
        Json summary{{"phase", "epoch"},
                     {"epoch", epoch},
                     {"l_h", sum_h / std::max(1, count)},
                     {"l_mi", sum_mi / std::max(1, count)},
                     {"total", total_loss(sum_h / std::max(1, count), sum_mi / std::max(1, count))},
                     {"lr", lr_at_epoch(epoch, config)},
                     {"val_pck", nullptr}};
        const bool last = epoch + 1 == config.epochs;
        if (config.val_every > 0 && !dataset.val.empty() && ((epoch + 1) % config.val_every == 0 || last)) {
            EvalOptions opts;
            opts.tau = config.val_tau;
            opts.interval = config.interval;
            const auto report = evaluate(model, dataset.val, eval_mode, opts, dataset.skeleton);
            summary["val_pck"] = report.mean_pck;
            if (last) result.final_val_pck = report.mean_pck;
        }
        result.log.add(summary);
    }
    result.model = model;
    return result;
}

}  // namespace stdpose
