/*
 * @file date.hpp
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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace adrrefine {

/// Calendar date with day precision, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_{days_since_epoch} {}

    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`. Returns nullopt on any malformed or impossible date.
    static std::optional<Date> parse(std::string_view text);

    constexpr std::int32_t days() const noexcept { return days_; }

    int year() const;
    unsigned month() const;
    unsigned day() const;

    std::string to_string() const;

    constexpr Date operator+(std::int32_t d) const noexcept { return Date{days_ + d}; }
    constexpr Date operator-(std::int32_t d) const noexcept { return Date{days_ - d}; }
    constexpr std::int32_t operator-(Date other) const noexcept { return days_ - other.days_; }

    constexpr auto operator<=>(const Date &) const = default;

private:
    std::int32_t days_ = 0;
};

/// Whole years elapsed between `birth` and `reference` (birthday rule: the year
/// counts once month/day of the birthday has been reached).
int age_in_years(Date birth, Date reference);

} // namespace adrrefine
