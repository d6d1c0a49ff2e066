// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "stdpose/decoder.hpp"
#include "stdpose/heatmaps.hpp"
#include "stdpose/stre.hpp"

namespace stdpose {

struct ModelConfig {
    int crop_height = 128;
    int crop_width = 96;
    int joints = 15;
    double sigma = 2.0;          // heatmap px
    BackboneConfig backbone;
    TFFConfig tff;
    TKSConfig tks;
    PADecoderConfig decoder;
    DAMParams dam;

    static constexpr int kHeatmapStride = 4;

    int heatmap_height() const { return crop_height / kHeatmapStride; }
    int heatmap_width() const { return crop_width / kHeatmapStride; }
    RenderParams render_params() const;
    void validate() const;

    Json to_json() const;
    static ModelConfig from_json(const Json& j);
};

/// Which components are active. Rows of the component ablation:
/// a = baseline, b = +TFF, c = +TKS, d = TFF+TKS+STDA, e = d+DAM, f = e+MI.
struct ComponentFlags {
    bool tff = true;
    bool tks = true;
    bool dam = true;
    bool stda = true;
    bool mi = true;

    /// Throws InvalidArgument for combinations outside the ablation rows'
    /// structure (e.g. DAM without STDA).
    void validate() const;
    bool temporal() const { return tff || tks; }
    std::string describe() const;

    static ComponentFlags baseline() { return {false, false, false, false, false}; }
    static ComponentFlags full() { return {}; }
    static ComponentFlags ablation_row(char row);
    static ComponentFlags from_names(const std::vector<std::string>& names);

    Json to_json() const;
    static ComponentFlags from_json(const Json& j);
    bool operator==(const ComponentFlags&) const = default;
};

struct ForwardOutputs {
    torch::Tensor features_left, features_key, features_right;   // (B, C, h, w)
    torch::Tensor heatmaps_left, heatmaps_key, heatmaps_right;   // (B, J, H', W')
    torch::Tensor fused;      // F~, equals features_key without TFF
    torch::Tensor merged;     // H~, equals heatmaps_key without TKS
    torch::Tensor mask;       // (B, 1, H', W'), undefined without STDA
    torch::Tensor final;      // H-bar
};

/// Backbone and keypoint head followed by the temporal encoder, the
/// dynamic-aware mask and the aggregation decoder, as enabled by the flags.
class PoseModelImpl : public torch::nn::Module {
public:
    PoseModelImpl(const ModelConfig& config, const ComponentFlags& flags);

    /// Images are (B, 3, H, W). When auxiliary heatmaps are supplied they
    /// replace the head's predictions for the left / right frames.
    ForwardOutputs forward(const torch::Tensor& left, const torch::Tensor& key, const torch::Tensor& right,
                           const std::optional<torch::Tensor>& aux_left = std::nullopt,
                           const std::optional<torch::Tensor>& aux_right = std::nullopt);

    /// Backbone + head on a single batch of frames.
    torch::Tensor frame_heatmaps(const torch::Tensor& images);

    void set_backbone_trainable(bool trainable);
    bool backbone_trainable() const { return backbone_trainable_; }

    /// Parameters outside the backbone and head.
    std::vector<torch::Tensor> temporal_parameters();
    std::vector<torch::Tensor> backbone_parameters();

    const ModelConfig& config() const { return config_; }
    const ComponentFlags& flags() const { return flags_; }

    SpatialEncoder& encoder() { return encoder_; }
    KeypointHead& head() { return head_; }
    TemporalFeatureFusion& tff() { return tff_; }
    TemporalKeypointSynthesis& tks() { return tks_; }
    DynamicAwareMask& dam() { return dam_; }
    SpatioTemporalAggregator& stda() { return stda_; }

private:
    ModelConfig config_;
    ComponentFlags flags_;
    bool backbone_trainable_ = true;
    SpatialEncoder encoder_{nullptr};
    KeypointHead head_{nullptr};
    TemporalFeatureFusion tff_{nullptr};
    TemporalKeypointSynthesis tks_{nullptr};
    DynamicAwareMask dam_{nullptr};
    SpatioTemporalAggregator stda_{nullptr};
};
TORCH_MODULE(PoseModel);

PoseModel make_model(const ModelConfig& config, const ComponentFlags& flags, std::uint64_t seed);

/// Single binary file: magic, format version, a JSON header (model config,
/// flags, tensor table, caller metadata) and raw little-endian float32
/// tensor data. Written to a temporary file and renamed into place.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, PoseModel& model, const Json& metadata = Json::object());

struct LoadedCheckpoint {
    PoseModel model{nullptr};
    Json metadata;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

/// Copies every tensor whose name and shape match from src into dst.
/// Returns the number of tensors copied.
int copy_matching_state(PoseModel& dst, PoseModel& src);

}  // namespace stdpose
