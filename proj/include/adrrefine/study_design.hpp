/*
 * @file study_design.hpp
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

#include "adrrefine/ehr_store.hpp"
#include "adrrefine/pattern_miner.hpp"
#include "adrrefine/survival_data.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace adrrefine {

struct StudyCriteria {
    std::vector<std::string> outcome_codes;
    std::vector<std::string> exposure_codes; ///< matched against drug events
    int case_min_age = 18;
    int case_max_age = 70;
    int cohort_min_age = 18;
    int cohort_max_age = 65;
    int min_history_days = 365;
    Date cohort_start = Date::from_ymd(2005, 1, 1);
    Date cohort_end = Date::from_ymd(2010, 12, 31);
    int followup_days = 1825;
    std::size_t controls_per_case = 2;
    int age_match_tolerance = 1; ///< years
};

/// Throws std::invalid_argument naming the violated field.
void validate_criteria(const StudyCriteria &c);

struct IndexedPatient {
    std::string patient_id;
    Date index_date;

    bool operator==(const IndexedPatient &) const = default;
};

struct CaseControlSet {
    std::vector<IndexedPatient> cases;                  ///< in matching order
    std::vector<std::vector<IndexedPatient>> controls;  ///< parallel to `cases`
    std::size_t dropped_cases = 0;                      ///< cases left without an eligible control

    std::size_t control_count() const noexcept;
    bool operator==(const CaseControlSet &) const = default;
};

/// Patients whose first outcome record meets the case criteria, ordered by
/// (index date, patient_id).
std::vector<IndexedPatient> select_cases(const PatientDatabase &db, const StudyCriteria &c);

/// Greedy matching without replacement: cases in (index date, patient_id)
/// order each take their nearest-registration eligible controls.
CaseControlSet match_controls(const PatientDatabase &db, const std::vector<IndexedPatient> &cases,
                              const StudyCriteria &c);

/// D1 (case baskets) and D2 (control baskets) over one dictionary.
std::pair<TransactionDatabase, TransactionDatabase> build_transaction_dbs(const PatientDatabase &db,
                                                                          const CaseControlSet &ccs);

struct CohortRow {
    std::string patient_id;
    std::string exposure_code;
    Date index_date;
    int age_at_index = 0;
    Sex sex = Sex::Female;
    int survival_time = 0; ///< days
    bool event = false;
    std::vector<std::uint8_t> exposure_history; ///< one bit per criteria exposure, on-or-before index
    std::vector<std::uint8_t> confounder_flags;

    bool operator==(const CohortRow &) const = default;
};

struct CohortResult {
    std::vector<CohortRow> rows; ///< ordered by (exposure order, patient_id)
    std::size_t zero_time_dropped = 0; ///< censored on the index day
    std::size_t multi_row_patients = 0;
};

CohortResult build_cohort(const PatientDatabase &db, const StudyCriteria &c);

struct DesignOptions {
    bool standardize_age = false;
};

struct DesignMatrix {
    SurvivalData data;
    std::vector<std::string> patient_ids;
    std::vector<std::size_t> exposure_columns;
    std::vector<std::size_t> itemset_columns;
};

/// Column name used for an itemset covariate, e.g. `itemset:A|B`.
std::string itemset_column_name(const std::vector<std::string> &codes);

/// Columns: age, sex (male = 1), exposures in criteria order, then itemsets.
/// Sets each row's confounder_flags.
DesignMatrix assemble_design_matrix(const PatientDatabase &db, std::vector<CohortRow> &rows,
                                    const std::vector<std::vector<std::string>> &itemsets,
                                    const StudyCriteria &c, const DesignOptions &options = {});

void write_case_control_csv(const std::filesystem::path &path, const CaseControlSet &ccs);
void write_cohort_csv(const std::filesystem::path &path, const std::vector<CohortRow> &rows,
                      const StudyCriteria &c);
void write_design_matrix_csv(const std::filesystem::path &path, const DesignMatrix &dm);

} // namespace adrrefine
