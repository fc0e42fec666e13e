/*
 * @file synthetic.hpp
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
#include "adrrefine/kv_config.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace adrrefine {

/// Unobserved patient trait that leaves a code footprint in the record and
/// raises both the outcome hazard and the prescribing of linked exposures.
struct LatentRiskFactor {
    std::string name;
    std::size_t n_codes = 3;              ///< codes drawn from the vocabulary
    double prevalence = 0.1;
    double outcome_hazard_multiplier = 1.0;
    std::map<std::string, double> prescribing_odds; ///< exposure code -> odds multiplier
    double code_record_probability = 1.0; ///< chance each footprint code is recorded
};

struct ExposureDefinition {
    std::string code;
    double prescribing_rate = 0.01;       ///< annual probability of a first prescription
    double adr_hazard_multiplier = 1.0;   ///< outcome hazard multiplier after first prescription
};

struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::size_t n_practices = 20;
    std::size_t n_patients = 1000;
    std::size_t item_vocabulary_size = 200;
    std::vector<LatentRiskFactor> risk_factors;
    std::vector<ExposureDefinition> exposures;
    std::string outcome_code = "OUTCOME";
    double baseline_outcome_hazard = 0.01; ///< annual probability at the reference age
    Date calendar_start = Date::from_ymd(1995, 1, 1);
    Date calendar_end = Date::from_ymd(2015, 12, 31);

    double background_codes_per_year = 1.0;
    double vocabulary_zipf_exponent = 1.0;
    double outcome_log_hazard_per_decade = 0.0; ///< age effect around age 50
    double exit_rate = 0.02;                    ///< annual probability of transfer-out or death
    int min_registration_age = 16;
    int max_registration_age = 65;
    int registration_spread_years = 10;
    double repeat_prescriptions_mean = 1.0;
};

/// Throws std::invalid_argument naming the first violated constraint.
void validate_spec(const SyntheticSpec &spec);

/// Codes assigned to each latent risk factor (deterministic in the seed).
std::vector<std::vector<std::string>> risk_factor_codes(const SyntheticSpec &spec);

std::string vocabulary_code(std::size_t index);

PatientDatabase generate_synthetic(const SyntheticSpec &spec);

/// Reads a spec from flat keys. Exposures and risk factors use indexed keys:
///   exposure.<id>.code / .prescribing_rate / .adr_hazard_multiplier
///   risk_factor.<id>.n_codes / .prevalence / .outcome_hazard_multiplier /
///       .prescribing_odds (list of `code:multiplier`) / .code_record_probability
/// Entries are ordered by <id>. Unknown keys are reported when `strict`.
SyntheticSpec parse_synthetic_spec(const KeyValueConfig &cfg, bool strict = true);

} // namespace adrrefine
