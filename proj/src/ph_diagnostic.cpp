/*
 * @file ph_diagnostic.cpp
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
#include "adrrefine/ph_diagnostic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adrrefine {

std::size_t PhDiagnostic::flagged_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(covariates.begin(), covariates.end(),
                                                  [](const PhCovariateTest &t) { return t.flagged; }));
}

PhDiagnostic check_proportional_hazards(const CoxModel &model, const SurvivalData &d, double level) {
    if (!model.covariance) throw std::invalid_argument("the proportional-hazards check needs an unpenalized model");
    if (model.names != d.names()) throw std::invalid_argument("model columns do not match the data");
    if (d.n_events() < 3) throw std::invalid_argument("the proportional-hazards check needs at least 3 events");

    const Eigen::MatrixXd x_all = d.dense();
    PhDiagnostic out;
    out.level = level;
    out.n_events = d.n_events();

    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < x_all.cols(); ++j) {
        PhCovariateTest t;
        t.name = d.names()[static_cast<std::size_t>(j)];
        if ((x_all.col(j).array() == x_all(0, j)).all()) {
            t.note = "constant covariate excluded";
        } else {
            keep.push_back(j);
            t.tested = true;
        }
        out.covariates.push_back(t);
    }
    if (keep.empty()) return out;

    const auto q = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd x(x_all.rows(), q);
    Eigen::VectorXd beta(q);
    for (Eigen::Index c = 0; c < q; ++c) {
        x.col(c) = x_all.col(keep[static_cast<std::size_t>(c)]);
        beta[c] = model.coefficients[keep[static_cast<std::size_t>(c)]];
    }
    std::vector<std::size_t> cols(keep.begin(), keep.end());
    const SurvivalData reduced = d.select_columns(cols);
    const Eigen::MatrixXd info = cox_information(beta, reduced);
    const Eigen::MatrixXd var = info.fullPivLu().inverse();
    const Eigen::VectorXd eta = x * beta;

    // Schoenfeld residuals: event covariates minus the risk-set weighted mean at that time.
    const auto &order = d.time_order();
    const auto &time = d.time();
    const auto &event = d.event();
    const double shift = eta.maxCoeff();
    std::vector<Eigen::VectorXd> residuals;
    std::vector<double> event_times;
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
    std::size_t k = order.size();
    while (k > 0) {
        const double t = time[order[k - 1]];
        std::vector<Eigen::Index> group_events;
        while (k > 0 && time[order[k - 1]] == t) {
            const auto i = static_cast<Eigen::Index>(order[--k]);
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            s1 += w * x.row(i).transpose();
            if (event[static_cast<std::size_t>(i)]) group_events.push_back(i);
        }
        const Eigen::VectorXd mean = s1 / s0;
        for (auto i : group_events) {
            residuals.push_back(x.row(i).transpose() - mean);
            event_times.push_back(t);
        }
    }

    // ranks of event times, ties averaged
    const std::size_t m = event_times.size();
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return event_times[a] < event_times[b]; });
    std::vector<double> rank(m);
    for (std::size_t a = 0; a < m;) {
        std::size_t b = a;
        while (b + 1 < m && event_times[idx[b + 1]] == event_times[idx[a]]) ++b;
        const double r = 0.5 * static_cast<double>(a + b) + 1.0;
        for (std::size_t c = a; c <= b; ++c) rank[idx[c]] = r;
        a = b + 1;
    }

    const double n_ev = static_cast<double>(m);
    Eigen::MatrixXd scaled(static_cast<Eigen::Index>(m), q);
    for (std::size_t i = 0; i < m; ++i) {
        scaled.row(static_cast<Eigen::Index>(i)) = (beta + n_ev * var * residuals[i]).transpose();
    }
    const Eigen::Map<const Eigen::VectorXd> rk(rank.data(), static_cast<Eigen::Index>(m));
    const Eigen::VectorXd rc = rk.array() - rk.mean();
    for (Eigen::Index c = 0; c < q; ++c) {
        const Eigen::VectorXd sc = scaled.col(c).array() - scaled.col(c).mean();
        const double denom = std::sqrt(sc.squaredNorm() * rc.squaredNorm());
        auto &t = out.covariates[static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])];
        if (!(denom > 0.0)) {
            t.tested = false;
            t.note = "no residual variation";
            continue;
        }
        const double r = std::clamp(sc.dot(rc) / denom, -1.0, 1.0);
        t.correlation = r;
        if (1.0 - r * r <= 0.0) {
            t.z = std::copysign(std::numeric_limits<double>::max(), r);
            t.p_value = 0.0;
        } else {
            t.z = r * std::sqrt((n_ev - 2.0) / (1.0 - r * r));
            t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
        }
        t.flagged = t.p_value < level;
    }
    return out;
}

} // namespace adrrefine
