/*
 * @file pipeline.hpp
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
#include "adrrefine/elastic_net.hpp"
#include "adrrefine/kv_config.hpp"
#include "adrrefine/pattern_miner.hpp"
#include "adrrefine/report.hpp"
#include "adrrefine/study_design.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrrefine {

struct PipelineConfig {
    // input: either both event-log paths or a synthetic spec
    std::filesystem::path demographics_path;
    std::filesystem::path events_path;
    std::filesystem::path synthetic_spec_path;
    std::optional<Date> data_end;
    LoadMode load_mode = LoadMode::Strict;
    std::filesystem::path candidates_path; ///< itemset list for the step-2-only `fit` command
    std::filesystem::path base_dir;        ///< relative input paths resolve here; not part of the hash

    StudyCriteria criteria;

    double minsup_primary = 0.001;
    double minsup_secondary = 0.0005;
    std::size_t max_size = 5;
    std::size_t k = 200;
    std::size_t min_itemset_size = 1;
    std::size_t max_itemsets = 10'000'000;

    std::vector<double> alphas{0.0, 0.05, 0.1, 0.3, 0.6, 1.0};
    std::size_t folds = 10;
    std::size_t n_lambda = 100;
    double lambda_min_ratio = 1e-3;
    double solver_tolerance = 1e-7;
    bool penalize_demographics = true;
    bool standardize_age = false;
    double ph_level = 0.05;

    double train_fraction = 0.5;
    std::optional<int> horizon_days; ///< defaults to the follow-up length

    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    std::size_t threads = 1;
    bool keep_intermediate = false;
    std::set<ReportFormat> formats{ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown};

    /// Reads every field from flat keys; unknown keys are errors.
    static PipelineConfig from_kv(const KeyValueConfig &cfg);
    static PipelineConfig load(const std::filesystem::path &path);

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Result-affecting settings as sorted key/value pairs (output location,
    /// thread count and formats are excluded).
    std::vector<std::pair<std::string, std::string>> canonical() const;
    /// FNV-1a over canonical(), as 16 hex digits.
    std::string hash() const;
};

/// A stage failure with the stage name and the counts reached before it.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string &message, const StageCounts &counts);
    const std::string &stage() const noexcept { return stage_; }
    const StageCounts &counts() const noexcept { return counts_; }

private:
    std::string stage_;
    StageCounts counts_;
};

struct StageSeeds {
    std::uint64_t split = 0;
    std::uint64_t cv = 0;
    std::uint64_t synthesis = 0;
};

StageSeeds derive_stage_seeds(std::uint64_t master);

/// Loads the event log or generates the synthetic database. `synthesis_seed`
/// receives the seed used when generating.
PatientDatabase load_input(const PipelineConfig &config, std::optional<std::uint64_t> *synthesis_seed = nullptr);

struct MiningOutcome {
    CaseControlSet case_control;
    EmergentResult emergent;
    TransactionDatabase d1;
    TransactionDatabase d2;
};

using ProgressFn = std::function<void(const std::string &)>;

/// Step 1: case selection, matching, baskets and emergent-pattern mining.
MiningOutcome run_mining(const PipelineConfig &config, const PatientDatabase &db, StageCounts &counts,
                         const ProgressFn &progress = {});

/// Step 2 on a given itemset list: cohort, design matrix, split, unadjusted and
/// penalized fits, validation.
SignalReport run_modelling(const PipelineConfig &config, const PatientDatabase &db,
                           const std::vector<std::vector<std::string>> &itemsets, StageCounts counts,
                           const ProgressFn &progress = {});

SignalReport run_pipeline(const PipelineConfig &config, const ProgressFn &progress = {});

/// Itemsets from an emergent-pattern CSV or a plain list (one `A|B` per line).
std::vector<std::vector<std::string>> read_itemset_list(const std::filesystem::path &path);

} // namespace adrrefine
