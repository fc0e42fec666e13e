/*
 * @file cox_model.hpp
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

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adrrefine {

struct PartialLikelihood {
    double value = 0.0;       ///< -log PL (Breslow ties)
    Eigen::VectorXd gradient;
};

PartialLikelihood neg_log_partial_likelihood(const Eigen::VectorXd &beta, const SurvivalData &d);

/// -log PL given a precomputed linear predictor.
double neg_log_partial_likelihood(std::span<const double> eta, const SurvivalData &d);

/// Observed information (Hessian of -log PL) at `beta`.
Eigen::MatrixXd cox_information(const Eigen::VectorXd &beta, const SurvivalData &d);

struct CoxFitOptions {
    double gradient_tolerance = 1e-8;
    int max_iterations = 100;
    /// |beta_j| * sd(x_j) beyond this is treated as divergence (monotone separation).
    double divergence_bound = 20.0;
};

struct WaldInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct CoxModel {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    std::optional<Eigen::MatrixXd> covariance; ///< unpenalized fits only
    int iterations = 0;
    double gradient_norm = 0.0;
    double neg_log_likelihood = 0.0;

    double standard_error(std::size_t j) const;
    /// beta +- z * se on the coefficient scale
    WaldInterval coefficient_interval(std::size_t j, double z = 1.959963984540054) const;
    /// exp of the coefficient interval
    WaldInterval hazard_ratio_interval(std::size_t j, double z = 1.959963984540054) const;
};

double hazard_ratio(double coefficient) noexcept;

/// Newton-Raphson with step halving on the exact partial likelihood.
/// Throws std::runtime_error on divergence (naming the column) or a singular
/// information matrix.
CoxModel fit_cox(const SurvivalData &d, const CoxFitOptions &options = {});

struct RankedExposure {
    std::string name;
    double coefficient = 0.0;
    std::size_t rank = 0;         ///< among exposures, 1 = largest coefficient
    std::size_t overall_rank = 0; ///< among all covariates
    double hazard_ratio = 1.0;
    bool filtered = false;        ///< coefficient exactly zero

    bool operator==(const RankedExposure &) const = default;
};

/// Exposures by descending coefficient, ties broken by name.
std::vector<RankedExposure> rank_exposures(std::span<const double> coefficients,
                                           const std::vector<std::string> &names,
                                           const std::vector<std::string> &exposure_names);

} // namespace adrrefine
