/*
 * @file cox_model.cpp
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
#include "adrrefine/cox_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace adrrefine {

namespace {

struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// One backward sweep over time: risk-set sums accumulate as time decreases,
/// and each group of tied event times contributes with the Breslow denominator.
Evaluation evaluate(const Eigen::MatrixXd &x, const SurvivalData &d, const Eigen::VectorXd &beta, bool with_hessian) {
    const auto p = x.cols();
    if (d.n_events() == 0) throw std::invalid_argument("partial likelihood needs at least one event");
    if (beta.size() != p) throw std::invalid_argument("coefficient length does not match column count");
    const Eigen::VectorXd eta = x * beta;
    const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

    Evaluation out;
    out.gradient = Eigen::VectorXd::Zero(p);
    if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(p, p);
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2;
    if (with_hessian) s2 = Eigen::MatrixXd::Zero(p, p);

    const auto &order = d.time_order();
    const auto &time = d.time();
    const auto &event = d.event();
    std::size_t k = order.size();
    while (k > 0) {
        const double t = time[order[k - 1]];
        double n_events = 0.0;
        double eta_events = 0.0;
        Eigen::VectorXd x_events = Eigen::VectorXd::Zero(p);
        while (k > 0 && time[order[k - 1]] == t) {
            const auto i = static_cast<Eigen::Index>(order[--k]);
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            s1.noalias() += w * x.row(i).transpose();
            if (with_hessian) s2.noalias() += w * x.row(i).transpose() * x.row(i);
            if (event[static_cast<std::size_t>(i)]) {
                n_events += 1.0;
                eta_events += eta[i];
                x_events += x.row(i).transpose();
            }
        }
        if (n_events == 0.0) continue;
        const Eigen::VectorXd mean = s1 / s0;
        out.value += n_events * (std::log(s0) + shift) - eta_events;
        out.gradient += n_events * mean - x_events;
        if (with_hessian) out.hessian += n_events * (s2 / s0 - mean * mean.transpose());
    }
    return out;
}

double column_sd(const Eigen::MatrixXd &x, Eigen::Index j) {
    const double mean = x.col(j).mean();
    return std::sqrt((x.col(j).array() - mean).square().mean());
}

} // namespace

PartialLikelihood neg_log_partial_likelihood(const Eigen::VectorXd &beta, const SurvivalData &d) {
    auto e = evaluate(d.dense(), d, beta, false);
    return {e.value, std::move(e.gradient)};
}

double neg_log_partial_likelihood(std::span<const double> eta, const SurvivalData &d) {
    if (eta.size() != d.n()) throw std::invalid_argument("linear predictor length does not match rows");
    if (d.n_events() == 0) throw std::invalid_argument("partial likelihood needs at least one event");
    const double shift = *std::max_element(eta.begin(), eta.end());
    const auto &order = d.time_order();
    const auto &time = d.time();
    const auto &event = d.event();
    double value = 0.0;
    double s0 = 0.0;
    std::size_t k = order.size();
    while (k > 0) {
        const double t = time[order[k - 1]];
        double n_events = 0.0;
        double eta_events = 0.0;
        while (k > 0 && time[order[k - 1]] == t) {
            const auto i = order[--k];
            s0 += std::exp(eta[i] - shift);
            if (event[i]) {
                n_events += 1.0;
                eta_events += eta[i];
            }
        }
        if (n_events > 0.0) value += n_events * (std::log(s0) + shift) - eta_events;
    }
    return value;
}

Eigen::MatrixXd cox_information(const Eigen::VectorXd &beta, const SurvivalData &d) {
    return evaluate(d.dense(), d, beta, true).hessian;
}

double CoxModel::standard_error(std::size_t j) const {
    if (!covariance) throw std::logic_error("standard errors need an unpenalized fit");
    return std::sqrt((*covariance)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
}

WaldInterval CoxModel::coefficient_interval(std::size_t j, double z) const {
    const double b = coefficients[static_cast<Eigen::Index>(j)];
    const double se = standard_error(j);
    return {b - z * se, b + z * se};
}

WaldInterval CoxModel::hazard_ratio_interval(std::size_t j, double z) const {
    const auto ci = coefficient_interval(j, z);
    return {std::exp(ci.lower), std::exp(ci.upper)};
}

double hazard_ratio(double coefficient) noexcept { return std::exp(coefficient); }

CoxModel fit_cox(const SurvivalData &d, const CoxFitOptions &options) {
    const Eigen::MatrixXd x = d.dense();
    const auto p = x.cols();
    if (p == 0) throw std::invalid_argument("fit_cox needs at least one covariate");
    std::vector<double> sd(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) sd[static_cast<std::size_t>(j)] = column_sd(x, j);

    auto check_divergence = [&](const Eigen::VectorXd &beta) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!std::isfinite(beta[j]) || std::abs(beta[j]) * sd[static_cast<std::size_t>(j)] > options.divergence_bound) {
                throw std::runtime_error("Cox fit diverges (monotone likelihood) in column '" +
                                         d.names()[static_cast<std::size_t>(j)] + "'");
            }
        }
    };

    // information vanishing after large steps means separation, not collinearity
    auto throw_if_separated = [&](const Eigen::VectorXd &beta) {
        Eigen::Index largest = 0;
        const double scaled = (beta.array() * Eigen::Map<const Eigen::ArrayXd>(sd.data(), p)).abs().maxCoeff(&largest);
        if (scaled > 5.0) {
            throw std::runtime_error("Cox fit diverges (monotone likelihood) in column '" +
                                     d.names()[static_cast<std::size_t>(largest)] + "'");
        }
    };

    CoxModel model;
    model.names = d.names();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Evaluation e = evaluate(x, d, beta, true);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        const bool small_gradient = e.gradient.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
        if (small_gradient && e.gradient.lpNorm<Eigen::Infinity>() == 0.0) break;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.hessian);
        const double max_ev = eig.eigenvalues().maxCoeff();
        const double min_ev = eig.eigenvalues().minCoeff();
        if (!(max_ev > 0.0) || min_ev <= 1e-12 * max_ev) {
            throw_if_separated(beta);
            Eigen::Index worst = 0;
            eig.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
            throw std::runtime_error("singular information matrix (column '" +
                                     d.names()[static_cast<std::size_t>(worst)] + "' is collinear or constant)");
        }
        const Eigen::VectorXd step = eig.eigenvectors() *
                                     (eig.eigenvalues().cwiseInverse().asDiagonal() *
                                      (eig.eigenvectors().transpose() * -e.gradient));
        // under separation the gradient decays while Newton steps stay large
        if (small_gradient &&
            (step.array() * Eigen::Map<const Eigen::ArrayXd>(sd.data(), p)).abs().maxCoeff() <= 1e-4) {
            break;
        }
        double scale = 1.0;
        Evaluation next;
        Eigen::VectorXd candidate;
        for (int halving = 0;; ++halving) {
            candidate = beta + scale * step;
            check_divergence(candidate);
            next = evaluate(x, d, candidate, true);
            if (std::isfinite(next.value) && next.value <= e.value + 1e-12 * std::abs(e.value)) break;
            if (halving == 30) throw std::runtime_error("Cox Newton step failed to decrease the objective");
            scale *= 0.5;
        }
        beta = candidate;
        e = std::move(next);
    }
    model.gradient_norm = e.gradient.lpNorm<Eigen::Infinity>();
    if (model.gradient_norm > options.gradient_tolerance) {
        Eigen::Index worst = 0;
        (beta.array() * Eigen::Map<const Eigen::ArrayXd>(sd.data(), p)).abs().maxCoeff(&worst);
        std::ostringstream msg;
        msg << "Cox fit did not converge in " << options.max_iterations << " iterations (gradient "
            << model.gradient_norm << "); largest coefficient in column '" << d.names()[static_cast<std::size_t>(worst)]
            << "'";
        throw std::runtime_error(msg.str());
    }
    check_divergence(beta);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(e.hessian);
    if (!lu.isInvertible()) {
        throw_if_separated(beta);
        throw std::runtime_error("singular information matrix at the Cox optimum");
    }
    model.coefficients = beta;
    model.covariance = lu.inverse();
    model.iterations = it;
    model.neg_log_likelihood = e.value;
    return model;
}

std::vector<RankedExposure> rank_exposures(std::span<const double> coefficients, const std::vector<std::string> &names,
                                           const std::vector<std::string> &exposure_names) {
    if (coefficients.size() != names.size()) throw std::invalid_argument("coefficient and name counts differ");
    auto by_value = [&](std::size_t a, std::size_t b) {
        if (coefficients[a] != coefficients[b]) return coefficients[a] > coefficients[b];
        return names[a] < names[b];
    };
    std::vector<std::size_t> all(names.size());
    std::iota(all.begin(), all.end(), 0u);
    std::sort(all.begin(), all.end(), by_value);
    std::vector<std::size_t> overall(names.size());
    for (std::size_t r = 0; r < all.size(); ++r) overall[all[r]] = r + 1;

    std::vector<std::size_t> exp_idx;
    for (const auto &e : exposure_names) {
        auto it = std::find(names.begin(), names.end(), e);
        if (it == names.end()) throw std::invalid_argument("exposure '" + e + "' is not a model column");
        exp_idx.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    std::sort(exp_idx.begin(), exp_idx.end(), by_value);
    std::vector<RankedExposure> out;
    for (std::size_t r = 0; r < exp_idx.size(); ++r) {
        const auto j = exp_idx[r];
        out.push_back({names[j], coefficients[j], r + 1, overall[j], std::exp(coefficients[j]), coefficients[j] == 0.0});
    }
    return out;
}

} // namespace adrrefine
