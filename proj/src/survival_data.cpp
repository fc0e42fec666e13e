/*
 * @file survival_data.cpp
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
#include "adrrefine/survival_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace adrrefine {

SurvivalData::SurvivalData(const Eigen::MatrixXd &x, std::vector<std::string> names, std::vector<double> time,
                           std::vector<int> event)
    : names_{std::move(names)}, time_{std::move(time)}, event_{std::move(event)} {
    if (static_cast<std::size_t>(x.rows()) != time_.size()) {
        throw std::invalid_argument("covariate rows do not match the time vector");
    }
    columns_.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto &col = columns_[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (x(i, j) != 0.0 || !std::isfinite(x(i, j))) {
                col.rows.push_back(static_cast<std::uint32_t>(i));
                col.values.push_back(x(i, j));
            }
        }
    }
    check_and_index();
}

SurvivalData::SurvivalData(std::size_t n_rows, std::vector<SparseColumn> columns, std::vector<std::string> names,
                           std::vector<double> time, std::vector<int> event)
    : columns_{std::move(columns)}, names_{std::move(names)}, time_{std::move(time)}, event_{std::move(event)} {
    if (n_rows != time_.size()) throw std::invalid_argument("row count does not match the time vector");
    check_and_index();
}

void SurvivalData::check_and_index() {
    const std::size_t n = time_.size();
    if (event_.size() != n) throw std::invalid_argument("event vector length does not match time");
    if (names_.size() != columns_.size()) throw std::invalid_argument("column name count does not match columns");
    std::unordered_set<std::string> seen;
    for (const auto &name : names_) {
        if (!seen.insert(name).second) throw std::invalid_argument("duplicate column name '" + name + "'");
    }
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        const auto &col = columns_[j];
        if (col.rows.size() != col.values.size()) throw std::invalid_argument("malformed sparse column");
        for (std::size_t k = 0; k < col.rows.size(); ++k) {
            if (col.rows[k] >= n || (k > 0 && col.rows[k] <= col.rows[k - 1])) {
                throw std::invalid_argument("column '" + names_[j] + "' has unsorted or out-of-range rows");
            }
            if (!std::isfinite(col.values[k])) {
                throw std::invalid_argument("non-finite covariate in column '" + names_[j] + "'");
            }
        }
    }
    n_events_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::isfinite(time_[i]) && time_[i] > 0.0)) throw std::invalid_argument("survival times must be positive");
        if (event_[i] != 0 && event_[i] != 1) throw std::invalid_argument("event indicators must be 0 or 1");
        n_events_ += static_cast<std::size_t>(event_[i]);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::stable_sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) { return time_[a] < time_[b]; });
}

std::optional<std::size_t> SurvivalData::column_index(const std::string &name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

Eigen::MatrixXd SurvivalData::dense() const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(p()));
    for (std::size_t j = 0; j < p(); ++j) {
        const auto &col = columns_[j];
        for (std::size_t k = 0; k < col.nnz(); ++k) x(col.rows[k], static_cast<Eigen::Index>(j)) = col.values[k];
    }
    return x;
}

std::vector<double> SurvivalData::linear_predictor(std::span<const double> beta) const {
    if (beta.size() != p()) throw std::invalid_argument("coefficient length does not match column count");
    std::vector<double> eta(n(), 0.0);
    for (std::size_t j = 0; j < p(); ++j) {
        if (beta[j] == 0.0) continue;
        const auto &col = columns_[j];
        for (std::size_t k = 0; k < col.nnz(); ++k) eta[col.rows[k]] += beta[j] * col.values[k];
    }
    return eta;
}

SurvivalData SurvivalData::subset(std::span<const std::size_t> rows) const {
    std::vector<std::int64_t> remap(n(), -1);
    std::vector<double> time;
    std::vector<int> event;
    time.reserve(rows.size());
    event.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= n()) throw std::out_of_range("subset row out of range");
        if (remap[rows[k]] >= 0) throw std::invalid_argument("subset rows must be distinct");
        remap[rows[k]] = static_cast<std::int64_t>(k);
        time.push_back(time_[rows[k]]);
        event.push_back(event_[rows[k]]);
    }
    std::vector<SparseColumn> cols(p());
    for (std::size_t j = 0; j < p(); ++j) {
        std::vector<std::pair<std::uint32_t, double>> entries;
        const auto &src = columns_[j];
        for (std::size_t k = 0; k < src.nnz(); ++k) {
            if (remap[src.rows[k]] >= 0) entries.emplace_back(static_cast<std::uint32_t>(remap[src.rows[k]]), src.values[k]);
        }
        std::sort(entries.begin(), entries.end());
        cols[j].rows.reserve(entries.size());
        cols[j].values.reserve(entries.size());
        for (const auto &[r, v] : entries) {
            cols[j].rows.push_back(r);
            cols[j].values.push_back(v);
        }
    }
    return SurvivalData(rows.size(), std::move(cols), names_, std::move(time), std::move(event));
}

SurvivalData SurvivalData::select_columns(std::span<const std::size_t> columns) const {
    std::vector<SparseColumn> cols;
    std::vector<std::string> names;
    for (auto j : columns) {
        cols.push_back(columns_.at(j));
        names.push_back(names_.at(j));
    }
    return SurvivalData(n(), std::move(cols), std::move(names), time_, event_);
}

} // namespace adrrefine
