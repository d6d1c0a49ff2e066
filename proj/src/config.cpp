// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/config.hpp"

#include <fstream>

#include "stdpose/json_schema.hpp"

namespace stdpose {

DataConfig data_config_from_json(const Json& j, const std::string& path, DataConfig d) {
    StrictObject o(j, path);
    o.read("num_train_videos", d.num_train_videos);
    o.read("num_val_videos", d.num_val_videos);
    o.read("num_frames", d.scene.num_frames);
    o.read("image_height", d.scene.image_height);
    o.read("image_width", d.scene.image_width);
    o.read("num_occluders", d.scene.num_occluders);
    o.read("occluder_size", d.scene.occluder_size);
    o.read("occluder_frames", d.scene.occluder_frames);
    o.read("blur_probability", d.scene.blur_probability);
    o.read("motion_smoothness", d.scene.motion_smoothness);
    o.read("max_joint_step", d.scene.max_joint_step);
    o.read("noise_sigma", d.scene.noise_sigma);
    o.read("seed", d.scene.seed);
    o.finish();
    d.validate();
    return d;
}

Json ExperimentConfig::to_json() const {
    const auto& h = harness;
    return {{"data", data_config_to_json(h.data)},
            {"pretrain_data", data_config_to_json(h.pretrain_data)},
            {"model", h.model.to_json()},
            {"flags", flags.to_json()},
            {"pretrain", h.pretrain.to_json()},
            {"train", h.train.to_json()},
            {"estimation_train", h.estimation_train.to_json()},
            {"eval", {{"tau", h.eval.tau}, {"T", h.eval.interval}}},
            {"seeds", h.seeds}};
}

ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig c;
    auto& h = c.harness;
    StrictObject o(j, "");
    if (const Json* d = o.raw("data")) h.data = data_config_from_json(*d, "data", h.data);
    if (const Json* d = o.raw("pretrain_data")) h.pretrain_data = data_config_from_json(*d, "pretrain_data", h.pretrain_data);
    if (const Json* m = o.raw("model")) {
        // model sections are read on top of the harness defaults
        Json merged = h.model.to_json();
        if (!m->is_object()) throw SchemaError("model", "expected a JSON object");
        for (const auto& [k, v] : m->items()) {
            if (merged.contains(k) && merged[k].is_object() && v.is_object()) {
                for (const auto& [k2, v2] : v.items()) merged[k][k2] = v2;
            } else {
                merged[k] = v;
            }
        }
        h.model = ModelConfig::from_json(merged);
    }
    if (const Json* f = o.raw("flags")) {
        try {
            c.flags = ComponentFlags::from_json(*f);
        } catch (const InvalidArgument& e) {
            throw SchemaError("flags", e.what());
        }
    }
    if (const Json* p = o.raw("pretrain")) {
        Json merged = h.pretrain.to_json();
        if (!p->is_object()) throw SchemaError("pretrain", "expected a JSON object");
        for (const auto& [k, v] : p->items()) merged[k] = v;
        h.pretrain = PretrainConfig::from_json(merged, "pretrain");
    }
    auto train_section = [&](const char* key, TrainConfig& target) {
        const Json* t = o.raw(key);
        if (!t) return;
        if (!t->is_object()) throw SchemaError(key, "expected a JSON object");
        Json merged = target.to_json();
        for (const auto& [k, v] : t->items()) {
            if ((k == "augmentation" || k == "weights") && v.is_object() && merged[k].is_object()) {
                for (const auto& [k2, v2] : v.items()) merged[k][k2] = v2;
            } else {
                merged[k] = v;
            }
        }
        target = TrainConfig::from_json(merged, key);
    };
    train_section("train", h.train);
    h.estimation_train.weights = h.train.weights;
    h.estimation_train.base_lr = h.train.base_lr;
    h.estimation_train.interval = h.train.interval;
    train_section("estimation_train", h.estimation_train);
    h.eval.interval = h.train.interval;
    if (auto e = o.child("eval")) {
        e->read("tau", h.eval.tau);
        e->read("T", h.eval.interval);
        e->finish();
    }
    o.read("seeds", h.seeds);
    o.finish();
    try {
        h.validate();
        c.flags.validate();
    } catch (const InvalidArgument& e) {
        throw SchemaError("<root>", e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open config file " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw InvalidArgument("config file " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace stdpose
