/*
 * @file validation.hpp
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

#include "adrrefine/survival_data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adrrefine {

struct SplitAssignment {
    std::uint64_t seed = 0;
    double fraction = 0.5;
    std::vector<std::size_t> train; ///< ascending
    std::vector<std::size_t> test;  ///< ascending
    std::string note;
};

/// Random split stratified by event status; each stratum sends
/// round(fraction * size) rows to training. Throws on a stratum with one row.
SplitAssignment split_train_test(const std::vector<int> &event, double fraction, std::uint64_t seed);

struct Concordance {
    double value = 0.0;
    std::uint64_t comparable = 0;
    std::uint64_t concordant = 0;
    std::uint64_t tied = 0;
};

/// Harrell's C. A pair (i, j) is comparable when i has an event at t_i and j is
/// still at risk then (t_j > t_i, or t_j == t_i with j censored).
Concordance concordance_index(std::span<const double> scores, std::span<const double> time,
                              std::span<const int> event);
Concordance concordance_index(std::span<const double> scores, const SurvivalData &d);

struct AucPoint {
    double time = 0.0;
    double auc = 0.0;
};

struct TimeDependentAuc {
    std::vector<AucPoint> curve;
    double summary = 0.0;
};

/// Cumulative/dynamic AUC(t) at each distinct event time up to `horizon`, cases
/// weighted by inverse Kaplan-Meier censoring survival; the summary averages
/// AUC(t) with the Kaplan-Meier event-time mass as weights.
TimeDependentAuc time_dependent_auc(std::span<const double> scores, std::span<const double> time,
                                    std::span<const int> event, double horizon);
TimeDependentAuc time_dependent_auc(std::span<const double> scores, const SurvivalData &d, double horizon);

struct ValidationScores {
    double concordance = 0.0;
    double auc_summary = 0.0;
    std::vector<AucPoint> auc_curve;
    std::uint64_t n_comparable_pairs = 0;
};

ValidationScores validate_scores(std::span<const double> scores, const SurvivalData &d, double horizon);

} // namespace adrrefine
