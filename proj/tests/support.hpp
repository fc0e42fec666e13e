/*
 * @file support.hpp
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

#include "adrrefine/random.hpp"
#include "adrrefine/survival_data.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace testsupport {

/// Exponential survival with linear predictor x * beta, uniform censoring, and
/// times rounded to `granularity` so ties occur.
inline adrrefine::SurvivalData random_survival(adrrefine::Rng &rng, std::size_t n, std::size_t p,
                                               const std::vector<double> &beta, double censor_max = 3.0,
                                               double granularity = 0.0) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    std::vector<double> time(n);
    std::vector<int> event(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double v = (j % 3 == 2) ? (rng.bernoulli(0.3) ? 1.0 : 0.0) : rng.uniform(-1.5, 1.5);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            eta += v * (j < beta.size() ? beta[j] : 0.0);
        }
        const double t_event = rng.exponential(std::exp(eta));
        const double t_cens = rng.uniform(0.0, censor_max);
        double t = std::min(t_event, t_cens);
        if (granularity > 0.0) t = granularity * std::ceil(t / granularity);
        time[i] = std::max(t, 1e-6);
        event[i] = t_event <= t_cens ? 1 : 0;
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    return adrrefine::SurvivalData(x, names, time, event);
}

inline std::filesystem::path temp_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("adrrefine_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testsupport
