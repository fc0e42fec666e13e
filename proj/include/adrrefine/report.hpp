/*
 * @file report.hpp
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

#include "adrrefine/cox_model.hpp"
#include "adrrefine/validation.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adrrefine {

/// Row of the unadjusted-model table: rank, exposure, coefficient, HR and its interval.
struct UnadjustedRow {
    std::size_t rank = 0;
    std::string name;
    double coefficient = 0.0;
    double hazard_ratio = 1.0;
    double hr_lower = 1.0;
    double hr_upper = 1.0;
    std::optional<double> ph_p_value; ///< absent when the diagnostic skipped the column

    bool operator==(const UnadjustedRow &) const = default;
};

struct AlphaBlock {
    double alpha = 1.0;
    double lambda_star = 0.0;
    double lambda_min = 0.0;
    std::size_t lambda_count = 0;
    std::size_t nonzero = 0;
    std::vector<RankedExposure> exposures;
    std::vector<std::string> warnings;

    bool operator==(const AlphaBlock &) const = default;
};

struct ValidationRow {
    std::string model; ///< "unadjusted" or "alpha=<value>"
    std::optional<double> alpha;
    std::optional<double> lambda_star;
    double concordance = 0.0;
    double auc_summary = 0.0;
    std::uint64_t comparable_pairs = 0;

    bool operator==(const ValidationRow &) const = default;
};

struct SelectedItemset {
    std::vector<std::string> codes;
    std::string direction;
    double supp_d1 = 0.0;
    double supp_d2 = 0.0;
    double bias_lift = 0.0;

    bool operator==(const SelectedItemset &) const = default;
};

/// Counts at every stage, in pipeline order.
struct StageCounts {
    std::size_t patients = 0;
    std::size_t cases = 0;
    std::size_t cases_dropped = 0;
    std::size_t controls = 0;
    std::size_t d1_transactions = 0;
    std::size_t d2_transactions = 0;
    std::size_t frequent_d1_primary = 0;
    std::size_t frequent_d1_secondary = 0;
    std::size_t frequent_d2_primary = 0;
    std::size_t frequent_d2_secondary = 0;
    std::size_t positive_candidates = 0;
    std::size_t negative_candidates = 0;
    std::size_t excluded_itemsets = 0;
    std::size_t selected_itemsets = 0;
    std::size_t cohort_rows = 0;
    std::size_t cohort_events = 0;
    std::size_t zero_time_dropped = 0;
    std::size_t multi_row_patients = 0;
    std::size_t design_columns = 0;
    std::size_t train_rows = 0;
    std::size_t train_events = 0;
    std::size_t test_rows = 0;
    std::size_t test_events = 0;

    bool operator==(const StageCounts &) const = default;
};

/// "name=value" pairs for every nonzero count reached so far.
std::string describe(const StageCounts &counts);

struct ConsistencyCheck {
    std::string name;
    bool passed = false;
    std::string detail;

    bool operator==(const ConsistencyCheck &) const = default;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t cv_seed = 0;
    std::optional<std::uint64_t> synthesis_seed;
    std::vector<std::pair<std::string, std::string>> config; ///< resolved settings, sorted by key
    StageCounts counts;

    bool operator==(const Provenance &) const = default;
};

struct SignalReport {
    std::vector<std::string> exposures;
    std::vector<UnadjustedRow> unadjusted;
    std::size_t ph_flagged = 0;
    std::vector<AlphaBlock> alphas;
    std::vector<ValidationRow> validation;
    std::vector<SelectedItemset> itemsets;
    std::vector<ConsistencyCheck> checks;
    Provenance provenance;

    bool all_checks_passed() const;
    bool operator==(const SignalReport &) const = default;
};

enum class ReportFormat { Json, Csv, Markdown };
ReportFormat parse_report_format(const std::string &token);

std::string report_to_json(const SignalReport &report);
SignalReport report_from_json(const std::string &text);
SignalReport load_report(const std::filesystem::path &path);

std::string report_to_markdown(const SignalReport &report);

/// Writes report.json, the summary CSVs and/or report.md into `dir` and
/// returns the paths written. Throws std::invalid_argument on an empty format set.
std::vector<std::filesystem::path> emit_report(const SignalReport &report, const std::set<ReportFormat> &formats,
                                               const std::filesystem::path &dir);

} // namespace adrrefine
