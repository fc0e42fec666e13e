/*
 * @file oracles.hpp
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

// Slow reference implementations the library is checked against.

#include "adrrefine/cox_model.hpp"
#include "adrrefine/pattern_miner.hpp"
#include "adrrefine/random.hpp"
#include "adrrefine/survival_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace oracle {

using adrrefine::ItemId;
using adrrefine::Itemset;

/// Every subset of the item universe up to max_size, counted by brute force.
inline std::map<Itemset, double> enumerate_frequent(const adrrefine::TransactionDatabase &db, double min_support,
                                                    std::size_t max_size) {
    const auto universe = db.item_universe();
    const std::size_t m = universe.size();
    const double n = static_cast<double>(db.size());
    const auto need = adrrefine::min_count_for(min_support, db.size());
    std::map<Itemset, double> out;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcountll(mask)) > max_size) continue;
        Itemset s;
        for (std::size_t b = 0; b < m; ++b) {
            if (mask >> b & 1) s.push_back(universe[b]);
        }
        std::size_t count = 0;
        for (const auto &t : db.transactions()) count += std::includes(t.begin(), t.end(), s.begin(), s.end());
        if (count >= need) out[s] = static_cast<double>(count) / n;
    }
    return out;
}

inline adrrefine::TransactionDatabase random_transactions(adrrefine::Rng &rng, std::size_t n_items,
                                                          std::size_t n_transactions, double density) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n_items; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    auto dict = std::make_shared<const adrrefine::ItemDictionary>(names);
    std::vector<Itemset> tx(n_transactions);
    for (auto &t : tx) {
        for (ItemId i = 0; i < n_items; ++i) {
            // skewed item frequencies make the frequent sets non-trivial
            if (rng.bernoulli(density * (1.0 - 0.5 * static_cast<double>(i) / static_cast<double>(n_items)))) t.push_back(i);
        }
    }
    return adrrefine::TransactionDatabase(dict, std::move(tx));
}

/// Harrell's C by checking every ordered pair.
struct PairCounts {
    double comparable = 0;
    double concordant = 0;
    double tied = 0;
};

inline PairCounts concordance_pairs(const std::vector<double> &score, const std::vector<double> &time,
                                    const std::vector<int> &event) {
    PairCounts c;
    for (std::size_t i = 0; i < time.size(); ++i) {
        if (!event[i]) continue;
        for (std::size_t j = 0; j < time.size(); ++j) {
            if (i == j) continue;
            const bool at_risk = time[j] > time[i] || (time[j] == time[i] && !event[j]);
            if (!at_risk) continue;
            c.comparable += 1;
            if (score[i] > score[j]) c.concordant += 1;
            else if (score[i] == score[j]) c.tied += 1;
        }
    }
    return c;
}

/// Central finite-difference gradient of -log PL.
inline Eigen::VectorXd numeric_gradient(const Eigen::VectorXd &beta, const adrrefine::SurvivalData &d, double h = 1e-5) {
    Eigen::VectorXd g(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        Eigen::VectorXd up = beta;
        Eigen::VectorXd dn = beta;
        up[j] += h;
        dn[j] -= h;
        g[j] = (adrrefine::neg_log_partial_likelihood(up, d).value - adrrefine::neg_log_partial_likelihood(dn, d).value) /
               (2.0 * h);
    }
    return g;
}

/// KKT residual at an original-scale coefficient vector, computed through the
/// dense likelihood gradient rather than the solver's internals.
inline double kkt_residual(const adrrefine::SurvivalData &d, const std::vector<double> &coef, double lambda, double alpha) {
    const Eigen::MatrixXd x = d.dense();
    const double n = static_cast<double>(d.n());
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
    const Eigen::VectorXd grad = adrrefine::neg_log_partial_likelihood(b, d).gradient / n;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
        if (sd == 0.0) continue;
        const double g = grad[j] / sd; // beta_orig = beta_std / sd
        const double bs = b[j] * sd;
        double r;
        if (bs != 0.0) r = std::abs(g + lambda * (1.0 - alpha) * bs + lambda * alpha * (bs > 0 ? 1.0 : -1.0));
        else r = std::max(0.0, std::abs(g) - lambda * alpha);
        worst = std::max(worst, r);
    }
    return worst;
}

} // namespace oracle
