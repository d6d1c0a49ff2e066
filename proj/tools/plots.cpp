// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "stdpose/errors.hpp"
#include "stdpose/trainer.hpp"

namespace stdpose::plots {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kLeft = 80, kRight = 30, kTop = 50, kBottom = 70;

const cv::Scalar kInk(40, 40, 40);
const cv::Scalar kGrid(225, 225, 225);
const std::vector<cv::Scalar> kPalette{{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214}, {189, 103, 148}};

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

struct Axes {
    double x0, x1, y0, y1;

    cv::Point map(double x, double y) const {
        const double fx = x1 > x0 ? (x - x0) / (x1 - x0) : 0.5;
        const double fy = y1 > y0 ? (y - y0) / (y1 - y0) : 0.5;
        return {kLeft + static_cast<int>(std::lround(fx * (kWidth - kLeft - kRight))),
                kHeight - kBottom - static_cast<int>(std::lround(fy * (kHeight - kTop - kBottom)))};
    }
};

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.45, bool centred = false) {
    int base = 0;
    const auto size = cv::getTextSize(s, cv::FONT_HERSHEY_SIMPLEX, scale, 1, &base);
    if (centred) at.x -= size.width / 2;
    cv::putText(img, s, at, cv::FONT_HERSHEY_SIMPLEX, scale, kInk, 1, cv::LINE_AA);
}

cv::Mat canvas(const std::string& title) {
    cv::Mat img(kHeight, kWidth, CV_8UC3, cv::Scalar::all(255));
    text(img, title, {kWidth / 2, 30}, 0.6, true);
    return img;
}

/// Pads a [lo, hi] range so flat data still gets a visible span.
std::pair<double, double> padded(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double pad = 0.08 * (hi - lo);
    return {lo - pad, hi + pad};
}

void frame(cv::Mat& img, const Axes& ax, const std::string& xlabel, const std::string& ylabel, bool x_ticks = true) {
    for (int i = 0; i <= 5; ++i) {
        const double y = ax.y0 + (ax.y1 - ax.y0) * i / 5.0;
        const auto p = ax.map(ax.x0, y);
        cv::line(img, p, ax.map(ax.x1, y), kGrid, 1);
        text(img, fmt(y), {8, p.y + 4}, 0.4);
    }
    if (x_ticks) {
        for (int i = 0; i <= 5; ++i) {
            const double x = ax.x0 + (ax.x1 - ax.x0) * i / 5.0;
            const auto p = ax.map(x, ax.y0);
            text(img, fmt(x), {p.x, p.y + 20}, 0.4, true);
        }
    }
    cv::rectangle(img, ax.map(ax.x0, ax.y1), ax.map(ax.x1, ax.y0), kInk, 1);
    text(img, xlabel, {kWidth / 2, kHeight - 18}, 0.5, true);
    text(img, ylabel, {8, kTop - 12}, 0.45);
}

void write(const cv::Mat& img, const std::string& out) {
    if (!cv::imwrite(out, img)) {
        throw InvalidArgument("cannot write plot to " + out);
    }
}

void polyline(cv::Mat& img, const Axes& ax, const std::vector<double>& xs, const std::vector<double>& ys,
              const cv::Scalar& colour, bool markers) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        cv::line(img, ax.map(xs[i], ys[i]), ax.map(xs[i + 1], ys[i + 1]), colour, 2, cv::LINE_AA);
    }
    if (markers) {
        for (std::size_t i = 0; i < xs.size(); ++i) cv::circle(img, ax.map(xs[i], ys[i]), 4, colour, cv::FILLED);
    }
}

void plot_t_sweep(const Json& j, const std::string& out) {
    std::vector<double> xs, ys;
    for (const auto& p : j.at("points")) {
        xs.push_back(p.at("T").get<double>());
        ys.push_back(p.at("mean_pck").get<double>());
    }
    if (xs.empty()) throw InvalidArgument("t_sweep file has no points");
    auto img = canvas("Mean PCK by label interval T");
    const auto [y0, y1] = padded(*std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end()));
    const auto [x0, x1] = padded(*std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end()));
    const Axes ax{x0, x1, y0, y1};
    frame(img, ax, "T (frames between labels)", "mean PCK");
    polyline(img, ax, xs, ys, kPalette[0], true);
    write(img, out);
}

void bars(const std::vector<std::string>& labels, const std::vector<double>& values, const std::string& title,
          const std::string& out) {
    if (values.empty()) throw InvalidArgument("nothing to plot");
    auto img = canvas(title);
    const auto [lo, hi] = padded(std::min(0.0, *std::min_element(values.begin(), values.end())),
                                 *std::max_element(values.begin(), values.end()));
    const Axes ax{0.0, static_cast<double>(values.size()), std::max(lo, 0.0), hi};
    frame(img, ax, "", "mean PCK", false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto top = ax.map(i + 0.2, values[i]);
        const auto bottom = ax.map(i + 0.8, ax.y0);
        cv::rectangle(img, top, bottom, kPalette[i % kPalette.size()], cv::FILLED);
        text(img, fmt(values[i]), {(top.x + bottom.x) / 2, top.y - 6}, 0.4, true);
        text(img, labels[i], {(top.x + bottom.x) / 2, bottom.y + 20}, 0.4, true);
    }
    write(img, out);
}

void plot_ablation(const Json& j, const std::string& out) {
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& r : j.at("rows")) {
        labels.push_back(r.at("label").get<std::string>());
        values.push_back(r.at("mean_pck").get<double>());
    }
    bars(labels, values, "Component ablation, mean PCK", out);
}

double mean_of(const Json& arr) {
    double s = 0.0;
    for (const auto& v : arr) s += v.get<double>();
    return arr.empty() ? 0.0 : s / static_cast<double>(arr.size());
}

void plot_propagation_vs_estimation(const Json& j, const std::string& out) {
    bars({"propagation", "estimation"}, {mean_of(j.at("propagation")), mean_of(j.at("estimation"))},
         "Same model, annotated vs predicted auxiliary frames", out);
}

void plot_pseudo(const Json& j, const std::string& out) {
    std::vector<std::string> labels{"supervised"};
    std::vector<double> values{mean_of(j.at("supervised"))};
    for (const auto& [T, v] : j.at("pseudo").items()) {
        labels.push_back("T=" + T);
        values.push_back(mean_of(v));
    }
    bars(labels, values, "Estimation training on pseudo-labels", out);
}

void plot_sigmoid(const Json& j, const std::string& out) {
    const auto ks = j.at("k").get<std::vector<double>>();
    const auto thetas = j.at("theta").get<std::vector<double>>();
    const auto grid = j.at("pck").get<std::vector<std::vector<double>>>();
    if (ks.empty() || thetas.empty()) throw InvalidArgument("sigmoid_sweep file has an empty grid");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : grid) {
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    auto img = canvas("Mean PCK over sigmoid parameters");
    const int gx = kLeft, gy = kTop, gw = kWidth - kLeft - kRight, gh = kHeight - kTop - kBottom;
    const int cw = gw / static_cast<int>(ks.size()), ch = gh / static_cast<int>(thetas.size());
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        for (std::size_t k = 0; k < ks.size(); ++k) {
            const double v = grid.at(t).at(k);
            const double f = hi > lo ? (v - lo) / (hi - lo) : 1.0;
            cv::Mat px(1, 1, CV_8UC1, cv::Scalar(static_cast<int>(std::lround(40 + 200 * f))));
            cv::Mat rgb;
            cv::applyColorMap(px, rgb, cv::COLORMAP_VIRIDIS);
            const cv::Point a(gx + static_cast<int>(k) * cw, gy + static_cast<int>(t) * ch);
            cv::rectangle(img, a, a + cv::Point(cw - 2, ch - 2), cv::Scalar(rgb.at<cv::Vec3b>(0, 0)), cv::FILLED);
            text(img, fmt(v), a + cv::Point(cw / 2, ch / 2), 0.45, true);
        }
        text(img, fmt(thetas[t]), {10, gy + static_cast<int>(t) * ch + ch / 2});
    }
    for (std::size_t k = 0; k < ks.size(); ++k) {
        text(img, fmt(ks[k]), {gx + static_cast<int>(k) * cw + cw / 2, gy + gh + 20}, 0.45, true);
    }
    text(img, "k", {kWidth / 2, kHeight - 18}, 0.5, true);
    text(img, "theta", {8, kTop - 12}, 0.45);
    write(img, out);
}

void plot_metrics(const std::string& path, const std::string& out) {
    const auto log = MetricsLog::read(path);
    std::vector<double> xs, lh, total;
    for (const auto& r : log.phase("train")) {
        xs.push_back(static_cast<double>(xs.size()));
        lh.push_back(r.at("l_h").get<double>());
        total.push_back(r.at("total").get<double>());
    }
    if (xs.empty()) {
        for (const auto& r : log.phase("pretrain")) {
            xs.push_back(static_cast<double>(xs.size()));
            lh.push_back(r.at("l_h").get<double>());
            total.push_back(r.at("total").get<double>());
        }
    }
    if (xs.empty()) throw InvalidArgument(path + " holds no training steps");
    double lo = std::min(*std::min_element(lh.begin(), lh.end()), *std::min_element(total.begin(), total.end()));
    double hi = std::max(*std::max_element(lh.begin(), lh.end()), *std::max_element(total.begin(), total.end()));
    const auto [y0, y1] = padded(lo, hi);
    auto img = canvas("Training loss");
    const Axes ax{0.0, std::max(1.0, xs.back()), y0, y1};
    frame(img, ax, "step", "loss");
    polyline(img, ax, xs, total, kPalette[1], false);
    polyline(img, ax, xs, lh, kPalette[0], false);
    text(img, "L_H", {kWidth - 150, kTop + 20});
    cv::line(img, {kWidth - 110, kTop + 16}, {kWidth - 80, kTop + 16}, kPalette[0], 2);
    text(img, "total", {kWidth - 150, kTop + 40});
    cv::line(img, {kWidth - 110, kTop + 36}, {kWidth - 80, kTop + 36}, kPalette[1], 2);
    write(img, out);
}

}  // namespace

void render_file(const std::string& input_path, const std::string& output_path) {
    std::ifstream in(input_path);
    if (!in) throw InvalidArgument("cannot open " + input_path);
    if (input_path.size() >= 6 && input_path.substr(input_path.size() - 6) == ".jsonl") {
        plot_metrics(input_path, output_path);
        return;
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(input_path + " is not valid JSON: " + e.what());
    }
    const std::string kind = j.is_object() ? j.value("kind", "") : "";
    if (kind == "t_sweep") plot_t_sweep(j, output_path);
    else if (kind == "ablation") plot_ablation(j, output_path);
    else if (kind == "sigmoid_sweep") plot_sigmoid(j, output_path);
    else if (kind == "propagation_vs_estimation") plot_propagation_vs_estimation(j, output_path);
    else if (kind == "pseudo_label") plot_pseudo(j, output_path);
    else throw InvalidArgument(input_path + ": unknown results kind '" + kind + "'");
}

}  // namespace stdpose::plots
