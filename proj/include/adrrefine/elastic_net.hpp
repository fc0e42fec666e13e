/*
 * @file elastic_net.hpp
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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adrrefine {

struct ElasticNetOptions {
    /// Explicit strictly descending grid; the automatic grid is used when empty.
    std::vector<double> lambdas;
    std::size_t n_lambda = 100;
    double lambda_min_ratio = 1e-3;
    double tolerance = 1e-7;             ///< max standardized coefficient change
    std::size_t max_passes = 100000;     ///< coordinate sweeps per lambda
    std::size_t max_outer = 100;         ///< quadratic re-expansions per lambda
    /// Per-column penalty multipliers (0 exempts a column); empty means all 1.
    std::vector<double> penalty_factor;
    std::size_t threads = 1;             ///< CV folds fitted concurrently
};

struct CoxFitPath {
    double alpha = 1.0;
    std::vector<std::string> names;
    std::vector<double> lambdas;          ///< strictly descending
    Eigen::MatrixXd coefficients;         ///< p x |lambdas|, original covariate scale
    std::vector<std::size_t> nonzero;     ///< penalized and unpenalized nonzero counts per lambda
    std::vector<std::size_t> passes;      ///< coordinate sweeps used per lambda
    std::vector<std::string> warnings;

    // filled by cross_validate
    std::size_t folds = 0;
    std::vector<double> cv_mean;
    std::vector<double> cv_se;
    std::optional<std::size_t> index_min;
    std::optional<std::size_t> index_star;

    std::vector<double> coefficients_at(std::size_t k) const;
    double lambda_min() const { return lambdas.at(index_min.value()); }
    double lambda_star() const { return lambdas.at(index_star.value()); }
};

/// Column means and population standard deviations used for internal standardization.
struct ColumnScaling {
    std::vector<double> mean;
    std::vector<double> sd; ///< 0 marks a constant column
};

ColumnScaling column_scaling(const SurvivalData &d);

/// Smallest lambda at which every penalized coefficient is zero, with alpha
/// clamped to at least 0.001.
double lambda_max(const SurvivalData &d, double alpha, const ElasticNetOptions &options = {});

std::vector<double> lambda_grid(double lambda_max, std::size_t n, double min_ratio);

/// Minimizes (1/n)(-log PL) + lambda [alpha |b|_1 + (1 - alpha)/2 |b|_2^2] on the
/// standardized scale along the grid, warm-starting each point from the previous.
CoxFitPath fit_elastic_net_path(const SurvivalData &d, double alpha, const ElasticNetOptions &options = {});

/// Fold labels 0..folds-1, assigned round-robin within each shuffled event stratum.
std::vector<std::size_t> stratified_folds(const std::vector<int> &event, std::size_t folds, std::uint64_t seed);

struct CvOptions {
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    ElasticNetOptions path;
};

/// Path on the full data plus per-lambda held-out deviance (full minus training
/// log partial likelihood at the training fit), normalized per held-out event.
CoxFitPath cross_validate(const SurvivalData &d, double alpha, const CvOptions &options = {});

/// Index of the minimal mean (largest lambda among exact ties).
std::size_t cv_min_index(const std::vector<double> &cv_mean);
/// Largest lambda whose error is within one standard error of the minimum.
std::size_t one_se_index(const std::vector<double> &cv_mean, const std::vector<double> &cv_se);

/// Largest KKT violation at path point `k` on the standardized scale.
double kkt_max_violation(const SurvivalData &d, const CoxFitPath &path, std::size_t k,
                         const ElasticNetOptions &options = {});

/// Per-row derivative of -log PL with respect to the linear predictor.
std::vector<double> eta_gradient(std::span<const double> eta, const SurvivalData &d);

} // namespace adrrefine
