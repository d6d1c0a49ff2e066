// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#include "stdpose/json_schema.hpp"

namespace stdpose {

StrictObject::StrictObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
        throw SchemaError(path_.empty() ? "<root>" : path_, "expected a JSON object");
    }
}

std::optional<StrictObject> StrictObject::child(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) {
        return std::nullopt;
    }
    return StrictObject(j_.at(key), qualify(key));
}

const Json* StrictObject::raw(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
}

void StrictObject::finish() const {
    for (const auto& [key, value] : j_.items()) {
        if (!seen_.contains(key)) {
            throw SchemaError(qualify(key), "unknown key");
        }
    }
}

}  // namespace stdpose
