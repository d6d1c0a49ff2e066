// Copyright (C) 2026 stdpose contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <string>

#include "stdpose/core.hpp"

namespace stdpose {

/// Typed reads from a JSON object that remember which keys were consumed, so
/// finish() can reject anything unrecognised. Errors carry the dotted key path.
class StrictObject {
public:
    StrictObject(const Json& j, std::string path);

    template <typename T>
    void read(const std::string& key, T& value) {
        if (!j_.contains(key)) {
            seen_.insert(key);
            return;
        }
        seen_.insert(key);
        const Json& v = j_.at(key);
        try {
            check_type<T>(v, key);
            value = v.get<T>();
        } catch (const Json::exception& e) {
            throw SchemaError(qualify(key), std::string("type mismatch: ") + e.what());
        }
    }

    /// Nested object; absent when the key is missing.
    std::optional<StrictObject> child(const std::string& key);

    const Json* raw(const std::string& key);

    std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    /// Throws SchemaError naming the first unknown key.
    void finish() const;

private:
    template <typename T>
    void check_type(const Json& v, const std::string& key) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw SchemaError(qualify(key), "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw SchemaError(qualify(key), "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.get<long long>() < 0) throw SchemaError(qualify(key), "expected a non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw SchemaError(qualify(key), "expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw SchemaError(qualify(key), "expected a string");
        }
    }

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace stdpose
