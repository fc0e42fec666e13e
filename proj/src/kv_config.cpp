/*
 * @file kv_config.cpp
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
#include "adrrefine/kv_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace adrrefine {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string source) {
    KeyValueConfig cfg;
    cfg.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": empty key");
        }
        if (cfg.entries_.contains(key)) {
            throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        cfg.lines_[key] = line_no;
        cfg.entries_[key] = std::move(value);
        if (end == text.size()) break;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool KeyValueConfig::contains(const std::string &key) const { return entries_.contains(key); }

void KeyValueConfig::set(const std::string &key, std::string value) {
    entries_[key] = std::move(value);
}

void KeyValueConfig::fail(const std::string &key, const std::string &message) const {
    std::string where = source_;
    if (auto it = lines_.find(key); it != lines_.end()) where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": key '" + key + "': " + message);
}

std::optional<std::string> KeyValueConfig::get_string(const std::string &key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    consumed_.insert(key);
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string &key, const std::string &fallback) const {
    return get_string(key).value_or(fallback);
}

std::string KeyValueConfig::require_string(const std::string &key) const {
    auto v = get_string(key);
    if (!v) fail(key, "required key missing");
    return *v;
}

double KeyValueConfig::get_double(const std::string &key, double fallback) const {
    auto v = get_string(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used != v->size()) fail(key, "trailing characters in number '" + *v + "'");
        return d;
    } catch (const std::logic_error &) {
        fail(key, "not a number: '" + *v + "'");
    }
}

std::int64_t KeyValueConfig::get_int(const std::string &key, std::int64_t fallback) const {
    auto v = get_string(key);
    if (!v) return fallback;
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) fail(key, "not an integer: '" + *v + "'");
    return out;
}

bool KeyValueConfig::get_bool(const std::string &key, bool fallback) const {
    auto v = get_string(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(key, "not a boolean: '" + *v + "'");
}

Date KeyValueConfig::get_date(const std::string &key, Date fallback) const {
    auto v = get_string(key);
    if (!v) return fallback;
    auto d = Date::parse(*v);
    if (!d) fail(key, "not a YYYY-MM-DD date: '" + *v + "'");
    return *d;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string &key,
                                                  const std::vector<std::string> &fallback) const {
    auto v = get_string(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v->size()) {
        auto comma = v->find(',', start);
        if (comma == std::string::npos) comma = v->size();
        std::string item = trim(std::string_view(*v).substr(start, comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string &key,
                                                    const std::vector<double> &fallback) const {
    if (!contains(key)) return fallback;
    std::vector<double> out;
    for (const auto &item : get_list(key, {})) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) fail(key, "bad number '" + item + "'");
        } catch (const std::logic_error &) {
            fail(key, "bad number '" + item + "'");
        }
    }
    return out;
}

std::set<std::string> KeyValueConfig::subkeys(const std::string &prefix) const {
    std::set<std::string> out;
    const std::string p = prefix + ".";
    for (auto it = entries_.lower_bound(p); it != entries_.end() && it->first.starts_with(p); ++it) {
        auto rest = std::string_view(it->first).substr(p.size());
        out.insert(std::string(rest.substr(0, rest.find('.'))));
    }
    return out;
}

void KeyValueConfig::reject_unknown_keys() const {
    std::string unknown;
    for (const auto &[key, value] : entries_) {
        if (!consumed_.contains(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
            if (auto it = lines_.find(key); it != lines_.end()) {
                unknown += " (line " + std::to_string(it->second) + ")";
            }
        }
    }
    if (!unknown.empty()) throw ConfigError(source_ + ": unknown key(s): " + unknown);
}

} // namespace adrrefine
