/*
 * @file test_validation.cpp
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
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "adrrefine/validation.hpp"

#include <cmath>
#include <set>

using namespace adrrefine;

TEST_CASE("the split is stratified, disjoint and reproducible") {
    std::vector<int> event(101, 0);
    for (std::size_t i = 0; i < 101; i += 4) event[i] = 1;
    const auto s = split_train_test(event, 0.5, 77);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 101);
    CHECK(s.train.size() + s.test.size() == 101);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    std::size_t train_events = 0;
    for (auto i : s.train) train_events += static_cast<std::size_t>(event[i]);
    CHECK(train_events == 13); // round(0.5 * 26)
    CHECK(split_train_test(event, 0.5, 77).train == s.train);
    CHECK_FALSE(split_train_test(event, 0.5, 78).train == s.train);
    CHECK_THROWS_AS(split_train_test(event, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_train_test(event, 1.0, 1), std::invalid_argument);

    std::vector<int> single(10, 0);
    single[3] = 1;
    CHECK_THROWS_AS(split_train_test(single, 0.5, 1), std::invalid_argument);
}

TEST_CASE("concordance matches pairwise enumeration with ties everywhere") {
    Rng rng(21);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng.uniform_index(39);
        std::vector<double> score(n);
        std::vector<double> time(n);
        std::vector<int> event(n);
        for (std::size_t i = 0; i < n; ++i) {
            score[i] = static_cast<double>(rng.uniform_index(5));
            time[i] = static_cast<double>(1 + rng.uniform_index(8));
            event[i] = rng.bernoulli(0.6);
        }
        const auto ref = oracle::concordance_pairs(score, time, event);
        if (ref.comparable == 0) {
            CHECK_THROWS_AS(concordance_index(score, time, event), std::invalid_argument);
            continue;
        }
        const auto c = concordance_index(score, time, event);
        CHECK(static_cast<double>(c.comparable) == ref.comparable);
        CHECK(static_cast<double>(c.concordant) == ref.concordant);
        CHECK(static_cast<double>(c.tied) == ref.tied);
        CHECK(c.value == doctest::Approx((ref.concordant + 0.5 * ref.tied) / ref.comparable));
    }
}

TEST_CASE("concordance of perfect, reversed and negated scores") {
    const std::vector<double> time{1, 2, 3, 4, 5, 6};
    const std::vector<int> event{1, 1, 0, 1, 1, 0};
    const std::vector<double> perfect{6, 5, 4, 3, 2, 1};
    const std::vector<double> reversed{1, 2, 3, 4, 5, 6};
    CHECK(concordance_index(perfect, time, event).value == 1.0);
    CHECK(concordance_index(reversed, time, event).value == 0.0);

    Rng rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> s(30);
        std::vector<double> neg(30);
        std::vector<double> t(30);
        std::vector<int> e(30);
        for (std::size_t i = 0; i < 30; ++i) {
            s[i] = static_cast<double>(rng.uniform_index(4));
            neg[i] = -s[i];
            t[i] = rng.uniform(0, 5);
            e[i] = rng.bernoulli(0.7);
        }
        CHECK(concordance_index(s, t, e).value + concordance_index(neg, t, e).value == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(concordance_index(std::vector<double>{1.0}, time, event), std::invalid_argument);
}

namespace {

struct Sample {
    std::vector<double> score;
    std::vector<double> time;
    std::vector<int> event;
};

Sample independent_sample(Rng &rng, std::size_t n) {
    Sample s;
    for (std::size_t i = 0; i < n; ++i) {
        s.score.push_back(rng.uniform());
        const double t = rng.exponential(1.0);
        const double c = rng.exponential(0.5);
        s.time.push_back(std::min(t, c));
        s.event.push_back(t <= c);
    }
    return s;
}

} // namespace

TEST_CASE("time-dependent AUC is one for a perfectly separating score") {
    std::vector<double> time;
    std::vector<int> event;
    std::vector<double> score;
    for (int i = 0; i < 50; ++i) {
        time.push_back(1.0 + i);
        event.push_back(1);
        score.push_back(100.0 - i);
    }
    const auto auc = time_dependent_auc(score, time, event, 40.0);
    CHECK(auc.summary == doctest::Approx(1.0));
    for (const auto &pt : auc.curve) CHECK(pt.auc == doctest::Approx(1.0));
    CHECK(auc.curve.back().time <= 40.0);
}

TEST_CASE("time-dependent AUC of an independent score is near one half") {
    Rng rng(23);
    double total = 0.0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        const auto s = independent_sample(rng, 2000);
        total += time_dependent_auc(s.score, s.time, s.event, 2.0).summary;
    }
    CHECK(std::abs(total / reps - 0.5) <= 0.03);
}

TEST_CASE("validation scores are invariant under monotone transforms") {
    Rng rng(24);
    auto d = testsupport::random_survival(rng, 300, 2, {0.8, -0.5});
    std::vector<double> score(d.n());
    std::vector<double> warped(d.n());
    const auto x = d.dense();
    for (std::size_t i = 0; i < d.n(); ++i) {
        score[i] = 0.8 * x(static_cast<Eigen::Index>(i), 0) - 0.5 * x(static_cast<Eigen::Index>(i), 1);
        warped[i] = std::exp(3.0 * score[i]) + 7.0;
    }
    const auto a = validate_scores(score, d, 2.0);
    const auto b = validate_scores(warped, d, 2.0);
    CHECK(a.concordance == doctest::Approx(b.concordance));
    CHECK(a.auc_summary == doctest::Approx(b.auc_summary));
    CHECK(a.concordance > 0.6);
    CHECK(a.auc_summary > 0.6);
    CHECK(a.n_comparable_pairs > 0);
}

TEST_CASE("AUC without censoring reduces to the empirical case/control comparison") {
    Rng rng(25);
    std::vector<double> score;
    std::vector<double> time;
    std::vector<int> event;
    for (int i = 0; i < 60; ++i) {
        score.push_back(static_cast<double>(rng.uniform_index(6)));
        time.push_back(static_cast<double>(1 + rng.uniform_index(10)));
        event.push_back(1);
    }
    const auto auc = time_dependent_auc(score, time, event, 100.0);
    for (const auto &pt : auc.curve) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < 60; ++i) {
            if (time[i] > pt.time) continue;
            for (std::size_t j = 0; j < 60; ++j) {
                if (time[j] <= pt.time) continue;
                den += 1.0;
                num += score[i] > score[j] ? 1.0 : score[i] == score[j] ? 0.5 : 0.0;
            }
        }
        if (den > 0) CHECK(pt.auc == doctest::Approx(num / den));
    }
}
