// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "stdpose/config.hpp"

using namespace stdpose;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("stdpose_config_" + name);
    std::ofstream(path) << text;
    return path.string();
}

std::string schema_key(const Json& j) {
    try {
        parse_config(j);
    } catch (const SchemaError& e) {
        return e.key();
    }
    return "";
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
    const auto c = parse_config(Json::object());
    EXPECT_EQ(c.model().dam.k, 1.5);
    EXPECT_EQ(c.model().dam.theta, 0.5);
    EXPECT_EQ(c.train().weights.alpha, 0.1);
    EXPECT_EQ(c.train().weights.beta, 0.01);
    EXPECT_EQ(c.train().interval, 7);
    EXPECT_EQ(c.train().base_lr, 2e-4);
    EXPECT_EQ(c.flags, ComponentFlags::full());
    EXPECT_EQ(c.to_json(), ExperimentConfig{}.to_json());
}

TEST(Config, SingleOverrideKeepsEverythingElse) {
    const auto c = parse_config(Json{{"train", {{"weights", {{"alpha", 0.0}}}}}});
    EXPECT_EQ(c.train().weights.alpha, 0.0);
    auto expected = ExperimentConfig{}.to_json();
    expected["train"]["weights"]["alpha"] = 0.0;
    auto got = c.to_json();
    // the estimation settings inherit the loss weights
    expected["estimation_train"]["weights"]["alpha"] = 0.0;
    EXPECT_EQ(got, expected);
}

TEST(Config, UnknownKeysAreNamed) {
    EXPECT_EQ(schema_key(Json{{"train", {{"weights", {{"aplha", 0.0}}}}}}), "train.weights.aplha");
    EXPECT_EQ(schema_key(Json{{"aplha", 1}}), "aplha");
    try {
        parse_config(Json{{"train", {{"weights", {{"aplha", 0.0}}}}}});
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("aplha"), std::string::npos);
    }
}

TEST(Config, TypeMismatchNamesTheKey) {
    EXPECT_EQ(schema_key(Json{{"train", {{"epochs", "ten"}}}}), "train.epochs");
    EXPECT_EQ(schema_key(Json{{"model", {{"dam", {{"k", true}}}}}}), "model.dam.k");
    EXPECT_THROW(parse_config(Json{{"train", {{"epochs", 0}}}}), InvalidArgument);
    EXPECT_THROW(parse_config(Json::array()), InvalidArgument);
}

TEST(Config, FileLoading) {
    const auto good = write_temp("good.json", R"({"eval": {"T": 5}, "seeds": [3]})");
    const auto c = load_config(good);
    EXPECT_EQ(c.harness.eval.interval, 5);
    EXPECT_EQ(c.harness.seeds, std::vector<std::uint64_t>{3});
    const auto bad = write_temp("bad.json", "{ not json");
    EXPECT_THROW(load_config(bad), InvalidArgument);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
    EXPECT_THROW(load_config("/nonexistent/stdpose.json"), InvalidArgument);
}

TEST(Config, FlagsSectionIsValidated) {
    EXPECT_EQ(parse_config(Json{{"flags", ComponentFlags::baseline().to_json()}}).flags, ComponentFlags::baseline());
    auto bad = ComponentFlags::full().to_json();
    bad["stda"] = false;
    EXPECT_THROW(parse_config(Json{{"flags", bad}}), InvalidArgument);
}
