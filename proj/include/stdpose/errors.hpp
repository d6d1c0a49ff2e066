// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace stdpose {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Config validation failure. key() is the dotted path of the offending entry.
class SchemaError : public InvalidArgument {
public:
    SchemaError(std::string key, const std::string& what)
        : InvalidArgument("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Raised when a training loss becomes non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stdpose
