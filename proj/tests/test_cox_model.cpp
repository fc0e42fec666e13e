/*
 * @file test_cox_model.cpp
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

#include "adrrefine/cox_model.hpp"
#include "adrrefine/ph_diagnostic.hpp"

#include <cmath>

using namespace adrrefine;

TEST_CASE("partial likelihood closed forms") {
    Eigen::MatrixXd x1(1, 1);
    x1 << 0.7;
    SurvivalData one(x1, {"x"}, {1.0}, {1});
    Eigen::VectorXd b(1);
    b << 2.3;
    CHECK(neg_log_partial_likelihood(b, one).value == doctest::Approx(0.0));

    Eigen::MatrixXd x2(2, 1);
    x2 << 1.0, -1.0;
    SurvivalData two(x2, {"x"}, {1.0, 2.0}, {1, 1});
    CHECK(neg_log_partial_likelihood(Eigen::VectorXd::Zero(1), two).value == doctest::Approx(std::log(2.0)));

    SurvivalData none(x2, {"x"}, {1.0, 2.0}, {0, 0});
    CHECK_THROWS_AS(neg_log_partial_likelihood(Eigen::VectorXd::Zero(1), none), std::invalid_argument);
}

TEST_CASE("non-finite covariates are rejected") {
    Eigen::MatrixXd x(2, 1);
    x << 1.0, std::nan("");
    CHECK_THROWS_AS(SurvivalData(x, {"x"}, {1.0, 2.0}, {1, 1}), std::invalid_argument);
}

TEST_CASE("analytic gradient matches finite differences with ties") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        auto d = testsupport::random_survival(rng, 20, 3, {0.5, -0.3, 0.8}, 2.0, 0.25);
        Eigen::VectorXd b(3);
        b << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
        const auto analytic = neg_log_partial_likelihood(b, d).gradient;
        const auto numeric = oracle::numeric_gradient(b, d);
        CHECK((analytic - numeric).norm() <= 1e-6 * std::max(1.0, analytic.norm()));
    }
}

TEST_CASE("eta form of the likelihood agrees with the coefficient form") {
    Rng rng(4);
    auto d = testsupport::random_survival(rng, 50, 3, {0.5, 0.0, -0.4}, 2.0, 0.1);
    const std::vector<double> b{0.2, -0.1, 0.3};
    const auto eta = d.linear_predictor(b);
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), 3);
    CHECK(neg_log_partial_likelihood(eta, d) == doctest::Approx(neg_log_partial_likelihood(bv, d).value));
}

TEST_CASE("Newton fit reaches a minimum that random perturbations cannot improve") {
    Rng rng(99);
    auto d = testsupport::random_survival(rng, 200, 4, {0.6, -0.4, 0.9, 0.0});
    const auto m = fit_cox(d);
    CHECK(m.gradient_norm <= 1e-8);
    const double best = m.neg_log_likelihood;
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd b = m.coefficients;
        for (Eigen::Index j = 0; j < b.size(); ++j) b[j] += rng.uniform(-0.1, 0.1);
        CHECK(neg_log_partial_likelihood(b, d).value >= best - 1e-9);
    }
    CHECK(m.coefficients[0] > 0.3);
    CHECK(m.coefficients[2] > 0.5);
}

TEST_CASE("a null covariate gets a small coefficient whose interval covers zero") {
    Rng rng(123);
    int covered = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto d = testsupport::random_survival(rng, 300, 1, {0.0});
        const auto m = fit_cox(d);
        const auto ci = m.coefficient_interval(0);
        covered += ci.lower <= 0.0 && 0.0 <= ci.upper;
        CHECK(std::abs(m.coefficients[0]) < 0.5);
    }
    CHECK(covered >= 17);
}

TEST_CASE("hazard ratio transform") {
    CHECK(hazard_ratio(0.563) == doctest::Approx(std::exp(0.563)).epsilon(1e-15));
    CHECK(hazard_ratio(std::log(1.757)) == doctest::Approx(1.757).epsilon(1e-15));
    Rng rng(5);
    auto d = testsupport::random_survival(rng, 200, 2, {0.5, 0.2});
    const auto m = fit_cox(d);
    const auto hr = m.hazard_ratio_interval(0);
    const auto ci = m.coefficient_interval(0);
    CHECK(hr.lower == doctest::Approx(std::exp(ci.lower)));
    CHECK(ci.upper - m.coefficients[0] == doctest::Approx(1.959963984540054 * m.standard_error(0)));
}

TEST_CASE("separation and collinearity are reported") {
    // every event has x = 1 and happens before every x = 0 subject
    Eigen::MatrixXd x(8, 1);
    x << 1, 1, 1, 1, 0, 0, 0, 0;
    SurvivalData sep(x, {"drug"}, {1, 2, 3, 4, 5, 6, 7, 8}, {1, 1, 1, 1, 0, 1, 0, 1});
    try {
        fit_cox(sep);
        FAIL("expected divergence");
    } catch (const std::runtime_error &e) {
        INFO(std::string(e.what()));
        CHECK(std::string(e.what()).find("drug") != std::string::npos);
    }

    Eigen::MatrixXd xc(6, 2);
    xc << 1, 2, 2, 4, 3, 6, 0, 0, 1, 2, 5, 10;
    SurvivalData col(xc, {"a", "b"}, {1, 2, 3, 4, 5, 6}, {1, 0, 1, 1, 0, 1});
    CHECK_THROWS_WITH_AS(fit_cox(col), doctest::Contains("singular"), std::runtime_error);
}

TEST_CASE("exposures rank by coefficient with name tie-break") {
    const std::vector<std::string> names{"age", "A", "B", "C", "D"};
    const std::vector<double> coef{0.02, 0.563, 0.398, 0.069, 0.398};
    auto r = rank_exposures(coef, names, {"C", "A", "B", "D"});
    REQUIRE(r.size() == 4);
    CHECK(r[0].name == "A");
    CHECK(r[1].name == "B");
    CHECK(r[2].name == "D");
    CHECK(r[2].coefficient == r[1].coefficient);
    CHECK(r[3].name == "C");
    CHECK(r[0].overall_rank == 1);
    CHECK(r[3].overall_rank == 4);
    CHECK(r[0].hazard_ratio == doctest::Approx(1.757).epsilon(1e-3));

    auto zeros = rank_exposures(std::vector<double>{0.1, 0.0, 0.0}, {"age", "A", "B"}, {"A", "B"});
    CHECK(zeros[0].filtered);
    CHECK(zeros[1].filtered);
    CHECK_THROWS_AS(rank_exposures(coef, names, {"Z"}), std::invalid_argument);
}

namespace {

/// Exponential hazard exp(beta(t) * x) with beta switching sign at `switch_time`.
SurvivalData reversing_effect(Rng &rng, std::size_t n, double b_early, double b_late, double switch_time) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
    std::vector<double> time(n);
    std::vector<int> event(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        const double w = rng.uniform(-1, 1);
        x(static_cast<Eigen::Index>(i), 0) = v;
        x(static_cast<Eigen::Index>(i), 1) = w;
        const double base = std::exp(0.3 * w);
        const double h1 = base * std::exp(b_early * v);
        const double h2 = base * std::exp(b_late * v);
        const double e = rng.exponential(1.0);
        double t = e / h1;
        if (t > switch_time) t = switch_time + (e - h1 * switch_time) / h2;
        const double c = rng.uniform(0.0, 4.0);
        time[i] = std::min(t, c);
        event[i] = t <= c;
    }
    return SurvivalData(x, {"v", "w"}, time, event);
}

} // namespace

TEST_CASE("proportional-hazards diagnostic flags a reversing effect") {
    Rng rng(8);
    auto d = reversing_effect(rng, 800, 1.2, -1.2, 0.5);
    auto m = fit_cox(d);
    auto diag = check_proportional_hazards(m, d);
    REQUIRE(diag.covariates.size() == 2);
    CHECK(diag.covariates[0].flagged);
    CHECK(diag.covariates[0].p_value < 0.01);
}

TEST_CASE("proportional-hazards diagnostic holds its nominal level") {
    Rng rng(10);
    int flagged = 0;
    int tested = 0;
    for (int rep = 0; rep < 60; ++rep) {
        auto d = reversing_effect(rng, 300, 0.5, 0.5, 1.0);
        auto diag = check_proportional_hazards(fit_cox(d), d);
        for (const auto &c : diag.covariates) {
            tested += c.tested;
            flagged += c.flagged;
        }
    }
    const double rate = static_cast<double>(flagged) / tested;
    CHECK(rate < 0.12);
}

TEST_CASE("constant covariates are excluded from the diagnostic") {
    Rng rng(3);
    auto base = testsupport::random_survival(rng, 100, 2, {0.5, 0.2});
    Eigen::MatrixXd x = base.dense();
    x.col(1).setConstant(1.0);
    SurvivalData d(x, {"x0", "const"}, base.time(), base.event());
    CoxModel m;
    m.names = d.names();
    m.coefficients = Eigen::VectorXd::Zero(2);
    m.coefficients[0] = 0.4;
    m.covariance = Eigen::MatrixXd::Identity(2, 2);
    auto diag = check_proportional_hazards(m, d);
    CHECK_FALSE(diag.covariates[1].tested);
    CHECK(diag.covariates[1].note.find("constant") != std::string::npos);
    CHECK(diag.covariates[0].tested);

    Eigen::MatrixXd few(3, 1);
    few << 1, 2, 3;
    SurvivalData tiny(few, {"x"}, {1, 2, 3}, {1, 1, 0});
    CoxModel mt;
    mt.names = {"x"};
    mt.coefficients = Eigen::VectorXd::Zero(1);
    mt.covariance = Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_AS(check_proportional_hazards(mt, tiny), std::invalid_argument);
}
