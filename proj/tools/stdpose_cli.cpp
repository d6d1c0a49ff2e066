// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <torch/torch.h>

#include "CLI11.hpp"
#include "plots.hpp"
#include "stdpose_version.hpp"
#include "stdpose/config.hpp"
#include "stdpose/propagate.hpp"

#ifndef STDPOSE_VERSION_STAMP
#define STDPOSE_VERSION_STAMP "stdpose-unknown"
#endif

namespace fs = std::filesystem;
using namespace stdpose;

namespace {

std::string timestamp(const char* format) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, format);
    return os.str();
}

std::string iso_now() { return timestamp("%Y-%m-%dT%H:%M:%SZ"); }

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << text;
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

/// Options shared by every subcommand that runs an experiment.
struct Common {
    std::string config_path;
    std::string out = "runs";
    std::optional<std::uint64_t> seed;
};

class Run {
public:
    Run(std::string command, const Common& common, const ExperimentConfig& config)
        : command_(std::move(command)), common_(common), started_(iso_now()) {
        const std::string base = command_ + "-" + timestamp("%Y%m%d-%H%M%S");
        fs::path dir = fs::path(common.out) / base;
        for (int i = 1; fs::exists(dir); ++i) dir = fs::path(common.out) / (base + "-" + std::to_string(i));
        fs::create_directories(dir);
        dir_ = fs::absolute(dir);
        if (!common.config_path.empty()) {
            fs::copy_file(common.config_path, dir_ / "config.json", fs::copy_options::overwrite_existing);
        }
        write_json(dir_ / "resolved_config.json", config.to_json());
        manifest(false);
    }

    const fs::path& dir() const { return dir_; }

    void finish() {
        manifest(true);
        std::cout << "output: " << dir_.string() << "\n";
    }

private:
    void manifest(bool finished) const {
        Json m{{"command", command_},
               {"config_path", common_.config_path.empty() ? Json(nullptr) : Json(fs::absolute(common_.config_path).string())},
               {"output_dir", dir_.string()},
               {"git_or_version_stamp", STDPOSE_VERSION_STAMP},
               {"seed", common_.seed ? Json(*common_.seed) : Json(nullptr)},
               {"started", started_},
               {"finished", finished ? Json(iso_now()) : Json(nullptr)}};
        write_json(dir_ / "run_manifest.json", m);
    }

    std::string command_;
    Common common_;
    std::string started_;
    fs::path dir_;
};

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
    if (c.seed) cfg.harness.seeds = {*c.seed};
    return cfg;
}

std::uint64_t run_seed(const ExperimentConfig& cfg) { return cfg.harness.seeds.front(); }

std::string default_data_dir() {
    const char* env = std::getenv("STDPOSE_DATA_DIR");
    return env ? std::string(env) : std::string();
}

/// Resolves a dataset argument (directory or manifest file) to its manifest.
std::string manifest_path(const std::string& data) {
    const fs::path p(data);
    return fs::is_directory(p) ? (p / "manifest.json").string() : p.string();
}

std::optional<Dataset> maybe_dataset(const std::string& data) {
    if (data.empty()) return std::nullopt;
    return load_dataset(manifest_path(data));
}

ComponentFlags parse_flags(const std::string& spec, const ComponentFlags& fallback) {
    if (spec.empty()) return fallback;
    if (spec.size() == 1) return ComponentFlags::ablation_row(spec[0]);
    if (spec == "baseline") return ComponentFlags::baseline();
    if (spec == "full") return ComponentFlags::full();
    std::vector<std::string> names;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, '+');) {
        if (!part.empty()) names.push_back(part);
    }
    return ComponentFlags::from_names(names);
}

std::vector<std::uint64_t> seeds_or_default(const std::vector<std::uint64_t>& given, const ExperimentConfig& cfg) {
    return given.empty() ? cfg.harness.seeds : given;
}

void print_progress(const std::string& line) { std::cerr << line << std::endl; }

void add_common(CLI::App* sub, Common& c, bool with_seed = true) {
    sub->add_option("--config", c.config_path, "experiment configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "parent directory of the timestamped run directory")->capture_default_str();
    if (with_seed) sub->add_option("--seed", c.seed, "seed for a single run (overrides config seeds)");
}

int run(int argc, char** argv) {
    CLI::App app{"Spatio-temporal video pose estimation on synthetic skeleton videos"};
    app.require_subcommand(1);
    app.set_version_flag("--version", STDPOSE_VERSION_STAMP);

    Common common;
    std::string data, checkpoint, mode_name = "propagation", flags_spec, split = "val", from, plot_out, pseudo;
    std::optional<int> interval;
    std::optional<double> tau;
    bool unlabeled_only = false, predicted_aux = false;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> rows;
    std::vector<int> intervals;
    std::vector<double> ks, thetas;

    auto* gen = app.add_subcommand("gen-data", "generate the synthetic benchmark and write it to disk");
    add_common(gen, common, false);
    gen->add_option("--data", data, "dataset directory (default: --out, then $STDPOSE_DATA_DIR)");

    auto* train = app.add_subcommand("train", "train one model and write its checkpoint and metrics");
    add_common(train, common);
    train->add_option("--mode", mode_name, "propagation or estimation")
        ->check(CLI::IsMember({"propagation", "estimation"}))
        ->capture_default_str();
    train->add_option("--T", interval, "label interval for propagation triplets");
    train->add_option("--flags", flags_spec, "ablation row a-f, 'baseline', 'full' or components joined by '+'");
    train->add_option("--data", data, "dataset directory or manifest (default: $STDPOSE_DATA_DIR, else generated)");

    auto* prop = app.add_subcommand("propagate", "propagate sparse labels and write a pseudo-label manifest");
    add_common(prop, common, false);
    prop->add_option("--checkpoint", checkpoint, "trained propagation model")->required()->check(CLI::ExistingFile);
    prop->add_option("--data", data, "dataset directory or manifest (default: $STDPOSE_DATA_DIR)");
    prop->add_option("--T", interval, "label interval of the sparse schedule");

    auto* ptrain = app.add_subcommand("pseudo-train", "estimation-mode training on a pseudo-label manifest");
    add_common(ptrain, common);
    ptrain->add_option("--pseudo", pseudo, "pseudo-label manifest written by propagate")->required();
    ptrain->add_option("--flags", flags_spec, "components of the retrained model");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
    add_common(eval, common, false);
    eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", data, "dataset directory or manifest (default: $STDPOSE_DATA_DIR, else generated)");
    eval->add_option("--mode", mode_name, "propagation or estimation")
        ->check(CLI::IsMember({"propagation", "estimation"}))
        ->capture_default_str();
    eval->add_option("--split", split, "train or val")->check(CLI::IsMember({"train", "val"}))->capture_default_str();
    eval->add_option("--T", interval, "label interval of the evaluation schedule");
    eval->add_option("--tau", tau, "PCK threshold as a fraction of the larger box side");
    eval->add_flag("--unlabeled-only", unlabeled_only, "score only frames off the label schedule");
    eval->add_flag("--predicted-aux", predicted_aux, "keep predicted auxiliary heatmaps in propagation mode");

    auto* ablate = app.add_subcommand("ablate", "component ablation over seeds");
    add_common(ablate, common, false);
    ablate->add_option("--rows", rows, "ablation rows (default a b c d e f)");
    ablate->add_option("--seeds", seeds, "seeds (default from config)");

    auto* tsweep = app.add_subcommand("t-sweep", "full model at several label intervals");
    add_common(tsweep, common, false);
    tsweep->add_option("--T-values", intervals, "intervals (default 2 3 5 7 9 15)");
    tsweep->add_option("--seeds", seeds, "seeds (default from config)");

    auto* ssweep = app.add_subcommand("sigmoid-sweep", "full model over a grid of mask sigmoid parameters");
    add_common(ssweep, common);
    ssweep->add_option("--k", ks, "slopes (default 0.5 1 1.5 2 5)");
    ssweep->add_option("--theta", thetas, "offsets (default 0 0.2 0.5 0.7)");

    auto* plot = app.add_subcommand("plot", "render a results file or metrics log to PNG");
    plot->add_option("--from", from, "results JSON or metrics JSONL")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output PNG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    torch::set_num_threads(1);

    if (plot->parsed()) {
        plots::render_file(from, plot_out);
        std::cout << "wrote " << plot_out << "\n";
        return 0;
    }

    auto cfg = load(common);
    if (interval) {
        cfg.harness.train.interval = *interval;
        cfg.harness.eval.interval = *interval;
    }
    if (tau) cfg.harness.eval.tau = *tau;
    cfg.harness.validate();

    if (gen->parsed()) {
        std::string target = !data.empty() ? data : (gen->count("--out") ? common.out : default_data_dir());
        if (target.empty()) throw InvalidArgument("gen-data needs --data, --out or STDPOSE_DATA_DIR");
        const Dataset ds = generate_dataset(cfg.harness.data);
        save_dataset(ds, target);
        Common record = common;
        record.out = (fs::path(target) / "runs").string();
        Run run("gen-data", record, cfg);
        write_json(run.dir() / "dataset.json", {{"manifest", fs::absolute(manifest_path(target)).string()},
                                                {"train_videos", ds.train.size()},
                                                {"val_videos", ds.val.size()}});
        run.finish();
        return 0;
    }

    if (data.empty()) data = default_data_dir();
    if (!data.empty() && !fs::exists(manifest_path(data))) {
        if (data == default_data_dir()) {
            data.clear();   // no dataset there yet; fall back to the generated benchmark
        } else {
            throw InvalidArgument("no dataset manifest at " + manifest_path(data));
        }
    }

    if (train->parsed()) {
        const ComponentFlags flags = parse_flags(flags_spec, cfg.flags);
        TrainConfig tc = mode_name == "estimation" ? cfg.harness.estimation_train : cfg.harness.train;
        if (interval) tc.interval = *interval;
        Run run("train", common, cfg);
        ExperimentContext ctx(cfg.harness);
        ctx.set_progress(print_progress);
        const auto loaded = maybe_dataset(data);
        const Dataset& ds = loaded ? *loaded : ctx.benchmark();
        const auto seed = run_seed(cfg);
        auto& result = ctx.train(flags, tc, cfg.harness.model, seed, &ds, loaded ? manifest_path(data) : "benchmark");
        save_checkpoint((run.dir() / "model.ckpt").string(), result.model,
                        {{"mode", to_string(tc.mode)}, {"T", tc.interval}, {"seed", seed}});
        result.log.write((run.dir() / "metrics.jsonl").string());
        Json summary{{"flags", flags.to_json()}, {"mode", to_string(tc.mode)}, {"T", tc.interval}, {"seed", seed}};
        if (!ds.val.empty()) {
            EvalOptions o = cfg.harness.eval;
            o.interval = tc.interval;
            const auto mode = tc.mode == TrainMode::propagation ? TripletMode::propagation : TripletMode::estimation;
            const auto report = evaluate(result.model, ds.val, mode, o, ds.skeleton);
            summary["val"] = report.to_json();
            std::cout << "val mean PCK " << report.mean_pck << "\n";
        }
        write_json(run.dir() / "summary.json", summary);
        run.finish();
        return 0;
    }

    if (prop->parsed()) {
        if (data.empty()) throw InvalidArgument("propagate needs --data or STDPOSE_DATA_DIR");
        const int T = interval.value_or(cfg.harness.train.interval);
        auto ckpt = load_checkpoint(checkpoint);
        const auto mpath = manifest_path(data);
        const Dataset ds = load_dataset(mpath);
        const auto locations = dataset_locations(mpath);
        Run run("propagate", common, cfg);
        Dataset sparse = ds;
        sparse.val.clear();
        const Dataset pseudo_ds = build_pseudo_dataset(ckpt.model, sparse, T);
        std::map<std::string, std::string> dir_of;
        for (std::size_t i = 0; i < ds.train.size(); ++i) dir_of[ds.train[i].name] = locations.train_dirs[i];
        std::vector<std::string> dirs;
        for (const auto& r : pseudo_ds.train) dirs.push_back(dir_of.at(r.name));
        save_dataset_annotations(pseudo_ds, (run.dir() / "pseudo").string(), dirs, {});
        Json summary{{"T", T},
                     {"manifest", (run.dir() / "pseudo" / "manifest.json").string()},
                     {"manual_ratio", pseudo_ds.manual_ratio()},
                     {"manual_frames", pseudo_ds.count(LabelSource::manual)},
                     {"pseudo_frames", pseudo_ds.count(LabelSource::pseudo)}};
        if (!ds.val.empty()) {
            EvalOptions o = cfg.harness.eval;
            o.interval = T;
            summary["val"] = evaluate(ckpt.model, ds.val, TripletMode::propagation, o, ds.skeleton).to_json();
        }
        write_json(run.dir() / "summary.json", summary);
        std::cout << "manual ratio " << pseudo_ds.manual_ratio() << "\n";
        run.finish();
        return 0;
    }

    if (ptrain->parsed()) {
        const Dataset pseudo_ds = load_dataset(manifest_path(pseudo));
        const ComponentFlags flags = parse_flags(flags_spec, cfg.flags);
        TrainConfig tc = cfg.harness.estimation_train;
        tc.seed = run_seed(cfg);
        Run run("pseudo-train", common, cfg);
        ExperimentContext ctx(cfg.harness);
        auto& init = ctx.pretrained(tc.seed);
        auto result = pseudo_label_train(pseudo_ds, tc, cfg.harness.model, flags, &init);
        save_checkpoint((run.dir() / "model.ckpt").string(), result.model, {{"mode", "estimation"}, {"seed", tc.seed}});
        result.log.write((run.dir() / "metrics.jsonl").string());
        write_json(run.dir() / "summary.json", {{"manual_ratio", pseudo_ds.manual_ratio()}, {"seed", tc.seed}});
        run.finish();
        return 0;
    }

    if (eval->parsed()) {
        auto ckpt = load_checkpoint(checkpoint);
        Run run("eval", common, cfg);
        std::optional<Dataset> loaded = maybe_dataset(data);
        if (!loaded) loaded = generate_dataset(cfg.harness.data);
        EvalOptions o = cfg.harness.eval;
        o.unlabeled_only = unlabeled_only;
        o.substitute_aux = !predicted_aux;
        const auto mode = mode_name == "estimation" ? TripletMode::estimation : TripletMode::propagation;
        const auto& videos = split == "train" ? loaded->train : loaded->val;
        const auto report = evaluate(ckpt.model, videos, mode, o, loaded->skeleton);
        write_json(run.dir() / "eval.json", report.to_json());
        std::cout << "mean PCK " << report.mean_pck << " over " << report.num_frames << " frames\n";
        run.finish();
        return 0;
    }

    ExperimentContext ctx(cfg.harness);
    ctx.set_progress(print_progress);

    if (ablate->parsed()) {
        std::vector<std::pair<std::string, ComponentFlags>> variants;
        if (rows.empty()) {
            variants = ablation_rows();
        } else {
            for (const auto& r : rows) variants.emplace_back(r, parse_flags(r, cfg.flags));
        }
        Run run("ablate", common, cfg);
        const auto table = run_ablation(ctx, variants, seeds_or_default(seeds, cfg));
        write_json(run.dir() / "ablation.json", table.to_json());
        write_text(run.dir() / "ablation.csv", table.to_csv());
        std::cout << table.to_csv();
        run.finish();
        return 0;
    }

    if (tsweep->parsed()) {
        if (intervals.empty()) intervals = {2, 3, 5, 7, 9, 15};
        Run run("t-sweep", common, cfg);
        const auto curve = run_t_sweep(ctx, intervals, seeds_or_default(seeds, cfg));
        write_json(run.dir() / "t_sweep.json", curve.to_json());
        write_text(run.dir() / "t_sweep.csv", curve.to_csv());
        std::cout << curve.to_csv();
        run.finish();
        return 0;
    }

    if (ssweep->parsed()) {
        if (ks.empty()) ks = {0.5, 1.0, 1.5, 2.0, 5.0};
        if (thetas.empty()) thetas = {0.0, 0.2, 0.5, 0.7};
        Run run("sigmoid-sweep", common, cfg);
        const auto grid = run_sigmoid_sweep(ctx, ks, thetas, run_seed(cfg));
        write_json(run.dir() / "sigmoid_sweep.json", grid.to_json());
        write_text(run.dir() / "sigmoid_sweep.csv", grid.to_csv());
        std::cout << grid.to_csv();
        run.finish();
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
}
