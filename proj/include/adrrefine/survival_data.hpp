/*
 * @file survival_data.hpp
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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adrrefine {

/// Column stored as (row, value) pairs with rows ascending; zero entries are implicit.
struct SparseColumn {
    std::vector<std::uint32_t> rows;
    std::vector<double> values;

    std::size_t nnz() const noexcept { return rows.size(); }
};

/// Right-censored survival data with named covariates. Columns are held sparse,
/// which keeps indicator-heavy design matrices cheap.
class SurvivalData {
public:
    SurvivalData() = default;
    SurvivalData(const Eigen::MatrixXd &x, std::vector<std::string> names, std::vector<double> time,
                 std::vector<int> event);
    SurvivalData(std::size_t n_rows, std::vector<SparseColumn> columns, std::vector<std::string> names,
                 std::vector<double> time, std::vector<int> event);

    std::size_t n() const noexcept { return time_.size(); }
    std::size_t p() const noexcept { return columns_.size(); }
    std::size_t n_events() const noexcept { return n_events_; }

    const std::vector<std::string> &names() const noexcept { return names_; }
    const SparseColumn &column(std::size_t j) const { return columns_.at(j); }
    const std::vector<double> &time() const noexcept { return time_; }
    const std::vector<int> &event() const noexcept { return event_; }
    std::optional<std::size_t> column_index(const std::string &name) const;

    /// Row indices sorted by ascending time (stable within ties).
    const std::vector<std::uint32_t> &time_order() const noexcept { return order_; }

    Eigen::MatrixXd dense() const;
    /// x * beta
    std::vector<double> linear_predictor(std::span<const double> beta) const;

    SurvivalData subset(std::span<const std::size_t> rows) const;
    SurvivalData select_columns(std::span<const std::size_t> columns) const;

private:
    void check_and_index();

    std::vector<SparseColumn> columns_;
    std::vector<std::string> names_;
    std::vector<double> time_;
    std::vector<int> event_;
    std::vector<std::uint32_t> order_;
    std::size_t n_events_ = 0;
};

} // namespace adrrefine
