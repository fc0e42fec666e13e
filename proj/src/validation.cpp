/*
 * @file validation.cpp
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
#include "adrrefine/validation.hpp"

#include "adrrefine/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adrrefine {

SplitAssignment split_train_test(const std::vector<int> &event, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("train fraction must lie in (0, 1)");
    SplitAssignment out;
    out.seed = seed;
    out.fraction = fraction;
    Rng rng(seed);
    for (int stratum : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < event.size(); ++i) {
            if (event[i] == stratum) idx.push_back(i);
        }
        if (idx.empty()) continue;
        if (idx.size() < 2) {
            throw std::invalid_argument(std::string("the ") + (stratum ? "event" : "censored") +
                                        " stratum has fewer than 2 rows");
        }
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    out.note = "stratified by event status";
    return out;
}

namespace {

template <typename T>
class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, T{}) {}
    void add(std::size_t i, T v) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += v;
    }
    /// sum over [0, i)
    T prefix(std::size_t i) const {
        T s{};
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<T> tree_;
};

void check_lengths(std::span<const double> scores, std::span<const double> time, std::span<const int> event) {
    if (scores.size() != time.size() || event.size() != time.size()) {
        throw std::invalid_argument("scores, times and events must have equal length");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("risk scores must be finite");
    }
}

std::vector<std::size_t> score_ranks(std::span<const double> scores, std::size_t &n_distinct) {
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    n_distinct = sorted.size();
    std::vector<std::size_t> rank(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        rank[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), scores[i]) - sorted.begin());
    }
    return rank;
}

std::vector<std::size_t> ascending_time(std::span<const double> time) {
    std::vector<std::size_t> order(time.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
    return order;
}

} // namespace

Concordance concordance_index(std::span<const double> scores, std::span<const double> time, std::span<const int> event) {
    check_lengths(scores, time, event);
    std::size_t n_ranks = 0;
    const auto rank = score_ranks(scores, n_ranks);
    const auto order = ascending_time(time);
    Fenwick<std::uint64_t> at_risk(n_ranks);
    std::uint64_t inserted = 0;
    Concordance c;
    std::size_t hi = order.size();
    while (hi > 0) {
        std::size_t lo = hi;
        while (lo > 0 && time[order[lo - 1]] == time[order[hi - 1]]) --lo;
        // censored rows at this time are still at risk for events at this time
        for (std::size_t k = lo; k < hi; ++k) {
            if (!event[order[k]]) {
                at_risk.add(rank[order[k]], 1);
                ++inserted;
            }
        }
        for (std::size_t k = lo; k < hi; ++k) {
            const auto i = order[k];
            if (!event[i]) continue;
            const auto below = at_risk.prefix(rank[i]);
            const auto equal = at_risk.prefix(rank[i] + 1) - below;
            c.comparable += inserted;
            c.concordant += below;
            c.tied += equal;
        }
        for (std::size_t k = lo; k < hi; ++k) {
            if (event[order[k]]) {
                at_risk.add(rank[order[k]], 1);
                ++inserted;
            }
        }
        hi = lo;
    }
    if (c.comparable == 0) throw std::invalid_argument("concordance is undefined without comparable pairs");
    c.value = (static_cast<double>(c.concordant) + 0.5 * static_cast<double>(c.tied)) / static_cast<double>(c.comparable);
    return c;
}

Concordance concordance_index(std::span<const double> scores, const SurvivalData &d) {
    return concordance_index(scores, d.time(), d.event());
}

TimeDependentAuc time_dependent_auc(std::span<const double> scores, std::span<const double> time,
                                    std::span<const int> event, double horizon) {
    check_lengths(scores, time, event);
    const std::size_t n = time.size();
    std::size_t n_ranks = 0;
    const auto rank = score_ranks(scores, n_ranks);
    const auto order = ascending_time(time);

    Fenwick<double> case_weight(n_ranks);
    Fenwick<std::int64_t> controls(n_ranks);
    for (std::size_t i = 0; i < n; ++i) controls.add(rank[i], 1);
    std::int64_t n_controls = static_cast<std::int64_t>(n);
    double total_case_weight = 0.0;
    double numerator = 0.0;

    double censor_surv = 1.0; // censoring KM just before the current time
    double event_surv = 1.0;  // event KM just before the current time
    TimeDependentAuc out;
    double weight_sum = 0.0;
    double weighted = 0.0;

    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo;
        while (hi < n && time[order[hi]] == time[order[lo]]) ++hi;
        const double t = time[order[lo]];
        if (t > horizon) break;
        const double at_risk = static_cast<double>(n - lo);
        std::size_t n_event = 0;
        for (std::size_t k = lo; k < hi; ++k) n_event += static_cast<std::size_t>(event[order[k]]);
        const std::size_t n_censor = (hi - lo) - n_event;

        // rows at t leave the control set
        for (std::size_t k = lo; k < hi; ++k) {
            const auto j = order[k];
            const double below_eq = case_weight.prefix(rank[j] + 1);
            const double eq = below_eq - case_weight.prefix(rank[j]);
            numerator -= (total_case_weight - below_eq) + 0.5 * eq;
            controls.add(rank[j], -1);
            --n_controls;
        }
        if (n_event > 0) {
            const double omega = 1.0 / censor_surv;
            for (std::size_t k = lo; k < hi; ++k) {
                const auto i = order[k];
                if (!event[i]) continue;
                const auto below = controls.prefix(rank[i]);
                const auto eq = controls.prefix(rank[i] + 1) - below;
                numerator += omega * (static_cast<double>(below) + 0.5 * static_cast<double>(eq));
                case_weight.add(rank[i], omega);
                total_case_weight += omega;
            }
            const double next_surv = event_surv * (1.0 - static_cast<double>(n_event) / at_risk);
            const double mass = event_surv - next_surv;
            event_surv = next_surv;
            if (n_controls > 0 && total_case_weight > 0.0) {
                const double auc = numerator / (total_case_weight * static_cast<double>(n_controls));
                out.curve.push_back({t, auc});
                weight_sum += mass;
                weighted += mass * auc;
            }
        }
        if (n_censor > 0) censor_surv *= 1.0 - static_cast<double>(n_censor) / at_risk;
        lo = hi;
    }
    if (out.curve.empty() || !(weight_sum > 0.0)) {
        throw std::invalid_argument("time-dependent AUC needs an event before the horizon with controls still at risk");
    }
    out.summary = weighted / weight_sum;
    return out;
}

TimeDependentAuc time_dependent_auc(std::span<const double> scores, const SurvivalData &d, double horizon) {
    return time_dependent_auc(scores, d.time(), d.event(), horizon);
}

ValidationScores validate_scores(std::span<const double> scores, const SurvivalData &d, double horizon) {
    ValidationScores v;
    const auto c = concordance_index(scores, d);
    v.concordance = c.value;
    v.n_comparable_pairs = c.comparable;
    auto auc = time_dependent_auc(scores, d, horizon);
    v.auc_summary = auc.summary;
    v.auc_curve = std::move(auc.curve);
    return v;
}

} // namespace adrrefine
