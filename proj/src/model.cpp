// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "stdpose/json_schema.hpp"

namespace stdpose {

RenderParams ModelConfig::render_params() const {
    return {heatmap_height(), heatmap_width(), sigma, static_cast<double>(kHeatmapStride)};
}

void ModelConfig::validate() const {
    backbone.validate();
    tff.validate();
    tks.validate();
    decoder.validate();
    dam.validate();
    if (joints < 1) {
        throw InvalidArgument("joints must be positive");
    }
    if (crop_height % kHeatmapStride != 0 || crop_width % kHeatmapStride != 0) {
        throw InvalidArgument("crop size must be divisible by the heatmap stride 4");
    }
    const int p = backbone.patch_size;
    if (p != 4 && p != 8 && p != 16) {
        throw InvalidArgument("patch size must be 4, 8 or 16 so the head can reach the heatmap resolution");
    }
    if (crop_height % p != 0 || crop_width % p != 0) {
        throw InvalidArgument("crop size must be divisible by the patch size");
    }
    if (!(sigma > 0.0)) {
        throw InvalidArgument("heatmap sigma must be positive");
    }
}

Json ModelConfig::to_json() const {
    return {{"crop_height", crop_height},
            {"crop_width", crop_width},
            {"joints", joints},
            {"sigma", sigma},
            {"backbone",
             {{"patch_size", backbone.patch_size},
              {"embed_dim", backbone.embed_dim},
              {"depth", backbone.depth},
              {"num_heads", backbone.num_heads},
              {"mlp_ratio", backbone.mlp_ratio}}},
            {"tff", {{"num_blocks", tff.num_blocks}, {"num_heads", tff.num_heads}, {"mlp_ratio", tff.mlp_ratio}}},
            {"tks",
             {{"temporal_merge_channels", tks.temporal_merge_channels},
              {"spatial_merge_channels", tks.spatial_merge_channels},
              {"kernel_size", tks.kernel_size}}},
            {"decoder",
             {{"num_pa_blocks", decoder.num_pa_blocks},
              {"embed_dim", decoder.embed_dim},
              {"num_heads", decoder.num_heads},
              {"heatmap_patch_size", decoder.heatmap_patch_size},
              {"mlp_ratio", decoder.mlp_ratio}}},
            {"dam", {{"k", dam.k}, {"theta", dam.theta}}}};
}

ModelConfig ModelConfig::from_json(const Json& j) {
    ModelConfig c;
    StrictObject o(j, "model");
    o.read("crop_height", c.crop_height);
    o.read("crop_width", c.crop_width);
    o.read("joints", c.joints);
    o.read("sigma", c.sigma);
    if (auto b = o.child("backbone")) {
        b->read("patch_size", c.backbone.patch_size);
        b->read("embed_dim", c.backbone.embed_dim);
        b->read("depth", c.backbone.depth);
        b->read("num_heads", c.backbone.num_heads);
        b->read("mlp_ratio", c.backbone.mlp_ratio);
        b->finish();
    }
    if (auto t = o.child("tff")) {
        t->read("num_blocks", c.tff.num_blocks);
        t->read("num_heads", c.tff.num_heads);
        t->read("mlp_ratio", c.tff.mlp_ratio);
        t->finish();
    }
    if (auto t = o.child("tks")) {
        t->read("temporal_merge_channels", c.tks.temporal_merge_channels);
        t->read("spatial_merge_channels", c.tks.spatial_merge_channels);
        t->read("kernel_size", c.tks.kernel_size);
        t->finish();
    }
    if (auto d = o.child("decoder")) {
        d->read("num_pa_blocks", c.decoder.num_pa_blocks);
        d->read("embed_dim", c.decoder.embed_dim);
        d->read("num_heads", c.decoder.num_heads);
        d->read("heatmap_patch_size", c.decoder.heatmap_patch_size);
        d->read("mlp_ratio", c.decoder.mlp_ratio);
        d->finish();
    }
    if (auto d = o.child("dam")) {
        d->read("k", c.dam.k);
        d->read("theta", c.dam.theta);
        d->finish();
    }
    o.finish();
    return c;
}

void ComponentFlags::validate() const {
    if (dam && !stda) {
        throw InvalidArgument("DAM requires STDA: the mask is only consumed by the aggregation decoder");
    }
    if (stda && !(tff && tks)) {
        throw InvalidArgument("STDA aggregates both TFF and TKS outputs; enable both");
    }
    if (tff && tks && !stda) {
        throw InvalidArgument("TFF and TKS together need STDA to aggregate them");
    }
    if (mi && !(tff && tks)) {
        throw InvalidArgument("the MI objective needs both fused features (TFF) and merged heatmaps (TKS)");
    }
}

std::string ComponentFlags::describe() const {
    std::string s;
    auto add = [&s](bool on, const char* name) {
        if (on) {
            s += s.empty() ? "" : "+";
            s += name;
        }
    };
    add(tff, "TFF");
    add(tks, "TKS");
    add(stda, "STDA");
    add(dam, "DAM");
    add(mi, "MI");
    return s.empty() ? "baseline" : s;
}

ComponentFlags ComponentFlags::ablation_row(char row) {
    switch (std::tolower(static_cast<unsigned char>(row))) {
        case 'a': return baseline();
        case 'b': return {true, false, false, false, false};
        case 'c': return {false, true, false, false, false};
        case 'd': return {true, true, false, true, false};
        case 'e': return {true, true, true, true, false};
        case 'f': return full();
        default: throw InvalidArgument(std::string("unknown ablation row '") + row + "'");
    }
}

ComponentFlags ComponentFlags::from_names(const std::vector<std::string>& names) {
    ComponentFlags f = baseline();
    for (auto name : names) {
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (name == "TFF") f.tff = true;
        else if (name == "TKS") f.tks = true;
        else if (name == "DAM") f.dam = true;
        else if (name == "STDA") f.stda = true;
        else if (name == "MI") f.mi = true;
        else throw InvalidArgument("unknown component flag '" + name + "'");
    }
    f.validate();
    return f;
}

Json ComponentFlags::to_json() const {
    return {{"tff", tff}, {"tks", tks}, {"dam", dam}, {"stda", stda}, {"mi", mi}};
}

ComponentFlags ComponentFlags::from_json(const Json& j) {
    ComponentFlags f;
    StrictObject o(j, "flags");
    o.read("tff", f.tff);
    o.read("tks", f.tks);
    o.read("dam", f.dam);
    o.read("stda", f.stda);
    o.read("mi", f.mi);
    o.finish();
    f.validate();
    return f;
}

PoseModelImpl::PoseModelImpl(const ModelConfig& config, const ComponentFlags& flags)
    : config_(config), flags_(flags) {
    config_.validate();
    flags_.validate();
    encoder_ = register_module("encoder", SpatialEncoder(config.backbone, config.crop_height, config.crop_width));
    head_ = register_module("head", KeypointHead(config.backbone.embed_dim, config.joints,
                                                 config.backbone.patch_size / ModelConfig::kHeatmapStride));
    if (flags.tff) {
        tff_ = register_module("tff", TemporalFeatureFusion(config.backbone.embed_dim, config.tff));
    }
    if (flags.tks) {
        tks_ = register_module("tks", TemporalKeypointSynthesis(config.joints, config.tks));
    }
    if (flags.dam) {
        dam_ = register_module("dam", DynamicAwareMask(config.joints, config.dam));
    }
    if (flags.stda) {
        stda_ = register_module("stda", SpatioTemporalAggregator(config.joints, config.backbone.embed_dim,
                                                                 config.heatmap_height(), config.heatmap_width(),
                                                                 config.decoder));
    }
}

torch::Tensor PoseModelImpl::frame_heatmaps(const torch::Tensor& images) {
    return head_->forward(encoder_->forward(images));
}

ForwardOutputs PoseModelImpl::forward(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right,
                                      const std::optional<torch::Tensor>& aux_left,
                                      const std::optional<torch::Tensor>& aux_right) {
    ForwardOutputs out;
    const auto B = key.size(0);
    {
        std::optional<torch::NoGradGuard> frozen;
        if (!backbone_trainable_) {
            frozen.emplace();
        }
        if (flags_.temporal()) {
            if (!left.sizes().equals(key.sizes()) || !right.sizes().equals(key.sizes())) {
                throw InvalidArgument("triplet frames must share one shape");
            }
            const auto features = encoder_->forward(torch::cat({left, key, right}, 0));
            const auto heatmaps = head_->forward(features);
            out.features_left = features.slice(0, 0, B);
            out.features_key = features.slice(0, B, 2 * B);
            out.features_right = features.slice(0, 2 * B, 3 * B);
            out.heatmaps_left = heatmaps.slice(0, 0, B);
            out.heatmaps_key = heatmaps.slice(0, B, 2 * B);
            out.heatmaps_right = heatmaps.slice(0, 2 * B, 3 * B);
        } else {
            out.features_key = encoder_->forward(key);
            out.heatmaps_key = head_->forward(out.features_key);
        }
    }
    if (aux_left && flags_.temporal()) {
        out.heatmaps_left = *aux_left;
    }
    if (aux_right && flags_.temporal()) {
        out.heatmaps_right = *aux_right;
    }

    out.fused = flags_.tff ? tff_->forward(out.features_left, out.features_key, out.features_right) : out.features_key;
    out.merged = flags_.tks ? tks_->forward(out.heatmaps_left, out.heatmaps_key, out.heatmaps_right)
                            : out.heatmaps_key;
    if (flags_.stda) {
        out.mask = flags_.dam ? dam_->forward(out.heatmaps_left, out.heatmaps_key, out.heatmaps_right)
                              : uniform_mask_like(out.merged);
        out.final = stda_->forward(out.fused, out.merged, out.mask);
    } else if (flags_.tks) {
        out.final = out.merged;
    } else if (flags_.tff) {
        out.final = head_->forward(out.fused);
    } else {
        out.final = out.heatmaps_key;
    }
    return out;
}

void PoseModelImpl::set_backbone_trainable(bool trainable) {
    backbone_trainable_ = trainable;
    for (auto& p : backbone_parameters()) {
        p.set_requires_grad(trainable);
    }
}

std::vector<torch::Tensor> PoseModelImpl::backbone_parameters() {
    auto params = encoder_->parameters();
    for (auto& p : head_->parameters()) {
        params.push_back(p);
    }
    return params;
}

std::vector<torch::Tensor> PoseModelImpl::temporal_parameters() {
    std::vector<torch::Tensor> params;
    auto add = [&params](const auto& holder) {
        if (!holder.is_empty()) {
            for (auto& p : holder->parameters()) {
                params.push_back(p);
            }
        }
    };
    add(tff_);
    add(tks_);
    add(dam_);
    add(stda_);
    return params;
}

PoseModel make_model(const ModelConfig& config, const ComponentFlags& flags, std::uint64_t seed) {
    torch::manual_seed(seed);
    return PoseModel(config, flags);
}

namespace {

constexpr char kMagic[8] = {'S', 'T', 'D', 'P', 'C', 'K', 'P', 'T'};

std::vector<std::pair<std::string, torch::Tensor>> tensors_of(PoseModel& model) {
    std::vector<std::pair<std::string, torch::Tensor>> out;
    for (const auto& item : model->named_parameters(true)) {
        out.emplace_back(item.key(), item.value());
    }
    for (const auto& item : model->named_buffers(true)) {
        out.emplace_back(item.key(), item.value());
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, PoseModel& model, const Json& metadata) {
    Json header;
    header["format_version"] = kCheckpointVersion;
    header["model_config"] = model->config().to_json();
    header["flags"] = model->flags().to_json();
    header["metadata"] = metadata;
    header["tensors"] = Json::array();
    const auto tensors = tensors_of(model);
    for (const auto& [name, t] : tensors) {
        header["tensors"].push_back({{"name", name}, {"dtype", "float32"}, {"shape", t.sizes().vec()}});
    }
    const std::string text = header.dump();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write checkpoint " + tmp);
        }
        out.write(kMagic, sizeof kMagic);
        const std::uint32_t version = kCheckpointVersion;
        const std::uint64_t len = text.size();
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& [name, t] : tensors) {
            const auto c = t.detach().to(torch::kFloat32).contiguous();
            out.write(reinterpret_cast<const char*>(c.data_ptr<float>()),
                      static_cast<std::streamsize>(c.numel() * sizeof(float)));
        }
        if (!out) {
            throw std::runtime_error("failed while writing checkpoint " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open checkpoint " + path);
    }
    char magic[sizeof kMagic];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw InvalidArgument(path + " is not a checkpoint file");
    }
    if (version != kCheckpointVersion) {
        throw InvalidArgument("unsupported checkpoint version " + std::to_string(version));
    }
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const Json header = Json::parse(text);

    LoadedCheckpoint loaded;
    loaded.model = PoseModel(ModelConfig::from_json(header.at("model_config")),
                             ComponentFlags::from_json(header.at("flags")));
    loaded.metadata = header.value("metadata", Json::object());

    auto tensors = tensors_of(loaded.model);
    const auto& table = header.at("tensors");
    if (table.size() != tensors.size()) {
        throw InvalidArgument("checkpoint tensor table does not match the model layout");
    }
    torch::NoGradGuard no_grad;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        auto& [name, t] = tensors[i];
        if (table[i].at("name").get<std::string>() != name ||
            table[i].at("shape").get<std::vector<int64_t>>() != t.sizes().vec()) {
            throw InvalidArgument("checkpoint tensor '" + name + "' does not match the model layout");
        }
        auto buf = torch::empty(t.sizes(), torch::kFloat32);
        in.read(reinterpret_cast<char*>(buf.data_ptr<float>()), static_cast<std::streamsize>(buf.numel() * sizeof(float)));
        t.copy_(buf);
    }
    if (!in) {
        throw InvalidArgument("checkpoint " + path + " is truncated");
    }
    return loaded;
}

int copy_matching_state(PoseModel& dst, PoseModel& src) {
    auto src_tensors = tensors_of(src);
    int copied = 0;
    torch::NoGradGuard no_grad;
    for (auto& [name, t] : tensors_of(dst)) {
        for (const auto& [sname, st] : src_tensors) {
            if (sname == name && st.sizes().equals(t.sizes())) {
                t.copy_(st);
                ++copied;
                break;
            }
        }
    }
    return copied;
}

}  // namespace stdpose
