/*
 * @file kv_config.hpp
 *
 * This file is part of adrrefine
 *
 * Copyright 2026 The adrrefine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "adrrefine/date.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrrefine {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration with `#` comments. Every lookup marks the
/// key as consumed so that leftovers can be reported as unknown keys.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, std::string source = "<string>");
    static KeyValueConfig load(const std::filesystem::path &path);

    bool contains(const std::string &key) const;
    void set(const std::string &key, std::string value);

    std::optional<std::string> get_string(const std::string &key) const;
    std::string get_string(const std::string &key, const std::string &fallback) const;
    std::string require_string(const std::string &key) const;
    double get_double(const std::string &key, double fallback) const;
    std::int64_t get_int(const std::string &key, std::int64_t fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;
    Date get_date(const std::string &key, Date fallback) const;
    /// Comma-separated list; empty entries are dropped.
    std::vector<std::string> get_list(const std::string &key,
                                      const std::vector<std::string> &fallback) const;
    std::vector<double> get_double_list(const std::string &key,
                                        const std::vector<double> &fallback) const;

    /// Keys sharing `prefix.`, with the next path component collected, e.g.
    /// `exposure.a.code` under prefix `exposure` yields `a`.
    std::set<std::string> subkeys(const std::string &prefix) const;

    /// Throws ConfigError listing every key never looked up.
    void reject_unknown_keys() const;

    const std::string &source() const noexcept { return source_; }
    const std::map<std::string, std::string> &entries() const noexcept { return entries_; }

private:
    [[noreturn]] void fail(const std::string &key, const std::string &message) const;

    std::string source_;
    std::map<std::string, std::string> entries_;
    std::map<std::string, std::size_t> lines_;
    mutable std::set<std::string> consumed_;
};

} // namespace adrrefine
