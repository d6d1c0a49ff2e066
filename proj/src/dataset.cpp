// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <opencv2/imgcodecs.hpp>

namespace stdpose {

namespace fs = std::filesystem;

std::string to_string(LabelSource s) {
    switch (s) {
        case LabelSource::manual: return "manual";
        case LabelSource::pseudo: return "pseudo";
        case LabelSource::none: return "none";
    }
    return "none";
}

LabelSource label_source_from_string(const std::string& s) {
    if (s == "manual") return LabelSource::manual;
    if (s == "pseudo") return LabelSource::pseudo;
    if (s == "none") return LabelSource::none;
    throw InvalidArgument("unknown label_source '" + s + "'");
}

int VideoRecord::num_labeled() const {
    int n = 0;
    for (auto s : label_source) {
        n += s != LabelSource::none;
    }
    return n;
}

double Dataset::manual_ratio() const {
    const int manual = count(LabelSource::manual);
    const int labeled = manual + count(LabelSource::pseudo);
    return labeled == 0 ? 0.0 : static_cast<double>(manual) / labeled;
}

int Dataset::count(LabelSource source) const {
    int n = 0;
    for (const auto& r : train) {
        for (auto s : r.label_source) {
            n += s == source;
        }
    }
    return n;
}

void DataConfig::validate() const {
    if (num_train_videos < 0 || num_val_videos < 0) {
        throw InvalidArgument("video counts must be non-negative");
    }
    scene.validate();
}

VideoRecord make_record(std::string name, SyntheticVideo video) {
    VideoRecord r;
    r.name = std::move(name);
    r.labels = video.gt_poses;
    r.label_source.assign(video.gt_poses.size(), LabelSource::manual);
    r.video = std::move(video);
    return r;
}

Dataset generate_dataset(const DataConfig& config, const SkeletonSpec& skeleton) {
    config.validate();
    Dataset ds;
    ds.skeleton = skeleton;
    auto make = [&](int i) {
        SceneConfig scene = config.scene;
        scene.seed = config.scene.seed * 1000003ULL + static_cast<std::uint64_t>(i) * 7919ULL + 17ULL;
        char name[32];
        std::snprintf(name, sizeof name, "video_%04d", i);
        return make_record(name, generate_video(scene, skeleton));
    };
    for (int i = 0; i < config.num_train_videos; ++i) {
        ds.train.push_back(make(i));
    }
    for (int i = 0; i < config.num_val_videos; ++i) {
        ds.val.push_back(make(config.num_train_videos + i));
    }
    return ds;
}

Dataset sparsify_labels(const Dataset& dataset, int interval) {
    Dataset out = dataset;
    for (auto& r : out.train) {
        r.schedule = build_label_schedule(r.video.num_frames(), interval);
        for (int t = 0; t < r.video.num_frames(); ++t) {
            const auto tu = static_cast<std::size_t>(t);
            if (r.schedule->is_labeled(t)) {
                r.labels[tu] = r.video.gt_poses[tu];
                r.label_source[tu] = LabelSource::manual;
            } else {
                r.label_source[tu] = LabelSource::none;
            }
        }
    }
    return out;
}

namespace {

Json flags_json(std::uint8_t flags) {
    Json f = Json::array();
    if (flags & kOccluded) f.push_back("occluded");
    if (flags & kBlurred) f.push_back("blurred");
    return f;
}

std::uint8_t flags_from_json(const Json& j) {
    std::uint8_t flags = kNoDegradation;
    for (const auto& s : j) {
        const auto name = s.get<std::string>();
        if (name == "occluded") flags |= kOccluded;
        else if (name == "blurred") flags |= kBlurred;
        else throw InvalidArgument("unknown degradation flag '" + name + "'");
    }
    return flags;
}

Json annotations_json(const VideoRecord& r) {
    Json j;
    j["poses"] = Json::array();
    for (const auto& p : r.video.gt_poses) j["poses"].push_back(p.to_json());
    j["boxes"] = Json::array();
    for (const auto& b : r.video.gt_boxes) j["boxes"].push_back({b.x, b.y, b.w, b.h});
    j["flags"] = Json::array();
    for (auto f : r.video.degradation_flags) j["flags"].push_back(flags_json(f));
    j["schedule"] = r.schedule ? r.schedule->to_json() : Json(nullptr);
    j["labels"] = Json::array();
    j["label_source"] = Json::array();
    for (std::size_t t = 0; t < r.labels.size(); ++t) {
        j["labels"].push_back(r.label_source[t] == LabelSource::none ? Json(nullptr) : r.labels[t].to_json());
        j["label_source"].push_back(to_string(r.label_source[t]));
    }
    return j;
}

void write_json(const fs::path& path, const Json& j) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << j.dump(1) << '\n';
    }
    fs::rename(tmp, path);
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw InvalidArgument(path.string() + " is not valid JSON: " + e.what());
    }
}

void write_frames(const SyntheticVideo& v, const fs::path& dir) {
    fs::create_directories(dir);
    for (int t = 0; t < v.num_frames(); ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.png", t);
        if (!cv::imwrite((dir / name).string(), v.frames[static_cast<std::size_t>(t)])) {
            throw std::runtime_error("failed to write " + (dir / name).string());
        }
    }
}

Json manifest_json(const Dataset& ds, const std::vector<std::string>& train_dirs,
                   const std::vector<std::string>& val_dirs) {
    Json m;
    m["format"] = "stdpose-dataset";
    m["version"] = 1;
    m["skeleton"] = "skeleton.json";
    m["videos"] = Json::array();
    auto add = [&](const VideoRecord& r, const std::string& dir, const char* split) {
        m["videos"].push_back({{"name", r.name},
                               {"dir", dir},
                               {"annotations", "annotations/" + r.name + ".json"},
                               {"split", split}});
    };
    for (std::size_t i = 0; i < ds.train.size(); ++i) add(ds.train[i], train_dirs[i], "train");
    for (std::size_t i = 0; i < ds.val.size(); ++i) add(ds.val[i], val_dirs[i], "val");
    return m;
}

void write_annotations(const Dataset& ds, const fs::path& root) {
    fs::create_directories(root / "annotations");
    for (const auto* split : {&ds.train, &ds.val}) {
        for (const auto& r : *split) {
            write_json(root / "annotations" / (r.name + ".json"), annotations_json(r));
        }
    }
    ds.skeleton.save((root / "skeleton.json").string());
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& directory) {
    const fs::path root(directory);
    fs::create_directories(root);
    std::vector<std::string> train_dirs, val_dirs;
    for (const auto& r : dataset.train) {
        write_frames(r.video, root / "frames" / r.name);
        train_dirs.push_back("frames/" + r.name);
    }
    for (const auto& r : dataset.val) {
        write_frames(r.video, root / "frames" / r.name);
        val_dirs.push_back("frames/" + r.name);
    }
    write_annotations(dataset, root);
    write_json(root / "manifest.json", manifest_json(dataset, train_dirs, val_dirs));
}

void save_dataset_annotations(const Dataset& dataset, const std::string& directory,
                              const std::vector<std::string>& train_frame_dirs,
                              const std::vector<std::string>& val_frame_dirs) {
    if (train_frame_dirs.size() != dataset.train.size() || val_frame_dirs.size() != dataset.val.size()) {
        throw InvalidArgument("frame directory list does not match the dataset");
    }
    const fs::path root(directory);
    fs::create_directories(root);
    write_annotations(dataset, root);
    write_json(root / "manifest.json", manifest_json(dataset, train_frame_dirs, val_frame_dirs));
}

DatasetLocations dataset_locations(const std::string& manifest_path) {
    const fs::path manifest(manifest_path);
    const Json m = read_json(manifest);
    const fs::path root = fs::absolute(manifest).parent_path();
    DatasetLocations loc;
    for (const auto& v : m.at("videos")) {
        fs::path dir(v.at("dir").get<std::string>());
        if (dir.is_relative()) dir = root / dir;
        (v.at("split").get<std::string>() == "val" ? loc.val_dirs : loc.train_dirs)
            .push_back(fs::weakly_canonical(dir).string());
    }
    return loc;
}

Dataset load_dataset(const std::string& manifest_path) {
    const fs::path manifest(manifest_path);
    const Json m = read_json(manifest);
    const fs::path root = fs::absolute(manifest).parent_path();
    if (m.value("format", "") != "stdpose-dataset") {
        throw InvalidArgument(manifest_path + " is not a dataset manifest");
    }
    Dataset ds;
    ds.skeleton = SkeletonSpec::load((root / m.at("skeleton").get<std::string>()).string());
    for (const auto& v : m.at("videos")) {
        fs::path dir(v.at("dir").get<std::string>());
        if (dir.is_relative()) dir = root / dir;
        const Json a = read_json(root / v.at("annotations").get<std::string>());

        VideoRecord r;
        r.name = v.at("name").get<std::string>();
        for (const auto& p : a.at("poses")) r.video.gt_poses.push_back(Pose::from_json(p));
        for (const auto& b : a.at("boxes")) {
            r.video.gt_boxes.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                                        b.at(3).get<double>()});
        }
        for (const auto& f : a.at("flags")) r.video.degradation_flags.push_back(flags_from_json(f));
        if (!a.at("schedule").is_null()) r.schedule = LabelSchedule::from_json(a.at("schedule"));
        const auto& labels = a.at("labels");
        const auto& sources = a.at("label_source");
        for (std::size_t t = 0; t < labels.size(); ++t) {
            const auto src = label_source_from_string(sources.at(t).get<std::string>());
            r.label_source.push_back(src);
            r.labels.push_back(src == LabelSource::none ? r.video.gt_poses[t] : Pose::from_json(labels[t]));
        }
        for (std::size_t t = 0; t < r.video.gt_poses.size(); ++t) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%04zu.png", t);
            cv::Mat frame = cv::imread((dir / name).string(), cv::IMREAD_COLOR);
            if (frame.empty()) {
                throw InvalidArgument("missing frame " + (dir / name).string());
            }
            r.video.frames.push_back(frame);
        }
        (v.at("split").get<std::string>() == "val" ? ds.val : ds.train).push_back(std::move(r));
    }
    return ds;
}

Json data_config_to_json(const DataConfig& d) {
    return {{"num_train_videos", d.num_train_videos},
            {"num_val_videos", d.num_val_videos},
            {"num_frames", d.scene.num_frames},
            {"image_height", d.scene.image_height},
            {"image_width", d.scene.image_width},
            {"num_occluders", d.scene.num_occluders},
            {"occluder_size", d.scene.occluder_size},
            {"occluder_frames", d.scene.occluder_frames},
            {"blur_probability", d.scene.blur_probability},
            {"motion_smoothness", d.scene.motion_smoothness},
            {"max_joint_step", d.scene.max_joint_step},
            {"noise_sigma", d.scene.noise_sigma},
            {"seed", d.scene.seed}};
}

}  // namespace stdpose
