/*
 * @file ph_diagnostic.hpp
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
#include "adrrefine/survival_data.hpp"

#include <string>
#include <vector>

namespace adrrefine {

struct PhCovariateTest {
    std::string name;
    bool tested = false;
    double correlation = 0.0; ///< scaled Schoenfeld residual vs event-time rank
    double z = 0.0;
    double p_value = 1.0;
    bool flagged = false;
    std::string note;
};

struct PhDiagnostic {
    std::vector<PhCovariateTest> covariates;
    std::size_t n_events = 0;
    double level = 0.05;

    std::size_t flagged_count() const noexcept;
};

/// Needs an unpenalized model (with covariance) fitted on `d`; throws
/// std::invalid_argument with fewer than 3 events.
PhDiagnostic check_proportional_hazards(const CoxModel &model, const SurvivalData &d, double level = 0.05);

} // namespace adrrefine
