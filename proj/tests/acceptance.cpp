/*
 * @file acceptance.cpp
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
// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include "oracles.hpp"
#include "support.hpp"

#include "adrrefine/cox_model.hpp"
#include "adrrefine/elastic_net.hpp"
#include "adrrefine/pattern_miner.hpp"
#include "adrrefine/pipeline.hpp"
#include "adrrefine/study_design.hpp"
#include "adrrefine/validation.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace adrrefine;

namespace {

// Tolerances and sizes
constexpr int kMinerDatabases = 120;
constexpr double kMinerSeconds = 60.0;
constexpr double kLiftSpot = 1.045;
constexpr int kSolverInstances = 20;
constexpr double kSolverCoefTol = 1e-3;
constexpr double kKktTol = 1e-5;
constexpr double kSolverSeconds = 120.0;
constexpr int kGradientInstances = 50;
constexpr double kGradientRelTol = 1e-6;
constexpr double kHrCoefficient = 0.563;
constexpr double kHrExpected = 1.757;
constexpr int kConcordanceInstances = 100;
constexpr int kAucRepetitions = 20;
constexpr std::size_t kAucN = 2000;
constexpr double kAucBand = 0.03;
constexpr int kScenarioSeeds = 5;
constexpr int kScenarioRequired = 4;
constexpr double kScenarioSeconds = 15.0 * 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// 1 -------------------------------------------------------------------------

Outcome miner_oracle() {
    const auto t0 = Clock::now();
    Rng rng(101);
    int mismatches = 0;
    std::size_t compared = 0;
    for (int rep = 0; rep < kMinerDatabases; ++rep) {
        const auto n_items = 1 + rng.uniform_index(12);
        const auto n_tx = 1 + rng.uniform_index(50);
        const auto db = oracle::random_transactions(rng, n_items, n_tx, rng.uniform(0.2, 0.8));
        const double minsup = 0.05 * static_cast<double>(1 + rng.uniform_index(10));
        const auto table = mine_frequent(db, {minsup, 5});
        std::map<Itemset, double> mined;
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto items = table.itemset(i);
            mined[Itemset(items.begin(), items.end())] = table.support(i);
        }
        const auto expected = oracle::enumerate_frequent(db, minsup, 5);
        compared += expected.size();
        if (mined != expected) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < kMinerSeconds,
            fmt("%d databases, %zu itemsets, %d mismatching, %.1fs (limit %.0fs)", kMinerDatabases, compared,
                mismatches, secs, kMinerSeconds)};
}

// 2 -------------------------------------------------------------------------

Outcome bias_lift_spot() {
    std::vector<std::vector<std::string>> b1(20, std::vector<std::string>{"y"});
    std::vector<std::vector<std::string>> b2(200, std::vector<std::string>{"y"});
    b1[0] = {"x"};
    b2[0] = {"x"};
    auto [d1, d2] = TransactionDatabase::from_codes_shared(b1, b2);
    const Itemset x{*d1.dictionary().find("x")};
    const auto t1 = mine_frequent(d1, {0.01, 5});
    const auto t2 = mine_frequent(d2, {0.005, 5});
    const double both = bias_lift(x, t1, t2);
    const double only_t1 = bias_lift(x, t1, mine_frequent(d2, {0.01, 5}));
    const double neither = bias_lift(x, mine_frequent(d1, {0.1, 5}), t2);
    const bool ok = round3(both) == kLiftSpot && std::abs(both - 1.05 / 1.005) < 1e-12 &&
                    std::abs(only_t1 - 1.05) < 1e-12 && neither == 0.0;
    return {ok, fmt("both tables %.6f (3dp %.3f), first table only %.6f, neither %.1f", both, round3(both), only_t1,
                    neither)};
}

// 3 -------------------------------------------------------------------------

Outcome solver_oracle() {
    const auto t0 = Clock::now();
    Rng rng(303);
    double worst_coef = 0.0;
    double worst_kkt = 0.0;
    int instances = 0;
    while (instances < kSolverInstances) {
        const std::size_t p = 2 + rng.uniform_index(7);
        std::vector<double> beta(p);
        for (auto &b : beta) b = rng.uniform(-0.8, 0.8);
        auto d = testsupport::random_survival(rng, 200, p, beta, 3.0, 0.05);
        if (static_cast<double>(d.n_events()) < 0.3 * 200.0) continue;
        ++instances;

        ElasticNetOptions o;
        const auto lasso = fit_elastic_net_path(d, 1.0, o);
        const auto last = lasso.lambdas.size() - 1;
        const auto newton = fit_cox(d);
        for (std::size_t j = 0; j < p; ++j) {
            worst_coef = std::max(worst_coef, std::abs(lasso.coefficients(static_cast<Eigen::Index>(j),
                                                                          static_cast<Eigen::Index>(last)) -
                                                       newton.coefficients[static_cast<Eigen::Index>(j)]));
        }
        for (double alpha : {0.0, 0.5, 1.0}) {
            const auto path = alpha == 1.0 ? lasso : fit_elastic_net_path(d, alpha, o);
            for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
                worst_kkt = std::max(worst_kkt, oracle::kkt_residual(d, path.coefficients_at(k), path.lambdas[k], alpha));
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst_coef <= kSolverCoefTol && worst_kkt <= kKktTol && secs < kSolverSeconds,
            fmt("%d instances, max |beta_enet - beta_newton| %.2e (tol %.0e), max KKT residual %.2e (tol %.0e), %.1fs",
                kSolverInstances, worst_coef, kSolverCoefTol, worst_kkt, kKktTol, secs)};
}

// 4 -------------------------------------------------------------------------

Outcome gradient_check() {
    Rng rng(404);
    double worst = 0.0;
    std::size_t tied = 0;
    for (int rep = 0; rep < kGradientInstances; ++rep) {
        const std::size_t p = 1 + rng.uniform_index(6);
        const std::size_t n = 10 + rng.uniform_index(60);
        std::vector<double> truth(p);
        for (auto &b : truth) b = rng.uniform(-1, 1);
        auto d = testsupport::random_survival(rng, n, p, truth, 2.0, 0.2);
        std::set<double> distinct(d.time().begin(), d.time().end());
        tied += distinct.size() < n;
        Eigen::VectorXd b(static_cast<Eigen::Index>(p));
        for (auto &v : b) v = rng.uniform(-1, 1);
        const auto analytic = neg_log_partial_likelihood(b, d).gradient;
        const auto numeric = oracle::numeric_gradient(b, d);
        worst = std::max(worst, (analytic - numeric).norm() / std::max(analytic.norm(), 1e-300));
    }
    return {worst <= kGradientRelTol && tied > 0,
            fmt("%d instances (%zu with tied times), max relative error %.2e (tol %.0e)", kGradientInstances, tied,
                worst, kGradientRelTol)};
}

// 5 -------------------------------------------------------------------------

Outcome hr_transform() {
    const double hr = hazard_ratio(kHrCoefficient);
    return {round3(hr) == kHrExpected,
            fmt("exp(%.3f) = %.6f -> %.3f, expected %.3f", kHrCoefficient, hr, round3(hr), kHrExpected)};
}

// 6 -------------------------------------------------------------------------

Outcome metric_oracles() {
    Rng rng(606);
    int c_mismatch = 0;
    for (int rep = 0; rep < kConcordanceInstances; ++rep) {
        const std::size_t n = 2 + rng.uniform_index(39);
        std::vector<double> score(n), time(n);
        std::vector<int> event(n);
        for (std::size_t i = 0; i < n; ++i) {
            score[i] = static_cast<double>(rng.uniform_index(5));
            time[i] = static_cast<double>(1 + rng.uniform_index(8));
            event[i] = rng.bernoulli(0.6) ? 1 : 0;
        }
        const auto slow = oracle::concordance_pairs(score, time, event);
        if (slow.comparable == 0) {
            // no usable pair: the fast version must refuse rather than invent a value
            bool threw = false;
            try {
                concordance_index(score, time, event);
            } catch (const std::exception &) {
                threw = true;
            }
            c_mismatch += !threw;
            continue;
        }
        const auto fast = concordance_index(score, time, event);
        const double slow_value = (slow.concordant + 0.5 * slow.tied) / slow.comparable;
        if (static_cast<double>(fast.comparable) != slow.comparable ||
            static_cast<double>(fast.concordant) != slow.concordant || static_cast<double>(fast.tied) != slow.tied ||
            fast.value != slow_value) {
            ++c_mismatch;
        }
    }

    double lo = 1.0, hi = 0.0;
    for (int rep = 0; rep < kAucRepetitions; ++rep) {
        std::vector<double> score(kAucN), time(kAucN);
        std::vector<int> event(kAucN);
        for (std::size_t i = 0; i < kAucN; ++i) {
            const double t = rng.exponential(1.0);
            const double c = rng.exponential(0.5);
            time[i] = std::min(t, c);
            event[i] = t <= c;
            score[i] = rng.uniform();
        }
        const double s = time_dependent_auc(score, time, event, 2.0).summary;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }

    std::vector<double> score(500), time(500);
    std::vector<int> event(500, 1);
    for (std::size_t i = 0; i < 500; ++i) {
        time[i] = rng.exponential(1.0);
        score[i] = -time[i];
    }
    const double perfect = time_dependent_auc(score, time, event, 1e9).summary;

    const bool ok = c_mismatch == 0 && lo >= 0.5 - kAucBand && hi <= 0.5 + kAucBand && perfect == 1.0;
    return {ok, fmt("concordance mismatches %d/%d; independent-score AUC range [%.4f, %.4f] over %d x n=%zu "
                    "(band 0.5 +- %.2f); separating score AUC %.6f",
                    c_mismatch, kConcordanceInstances, lo, hi, kAucRepetitions, kAucN, kAucBand, perfect)};
}

// 7 -------------------------------------------------------------------------

struct SeedVerdict {
    bool a = false, b = false, c = false;
    std::string note;
};

SeedVerdict judge(const SignalReport &r) {
    static const std::set<std::string> adrs{"ADR_A", "ADR_B"};
    static const std::set<std::string> plain{"PLAIN_D", "PLAIN_E", "PLAIN_F"};
    SeedVerdict v;
    v.a = !r.unadjusted.empty() && r.unadjusted.front().name == "CONF_C";
    const AlphaBlock *ridge = nullptr;
    const AlphaBlock *lasso = nullptr;
    for (const auto &blk : r.alphas) {
        if (blk.alpha == 0.0) ridge = &blk;
        if (blk.alpha == 1.0) lasso = &blk;
    }
    if (ridge) {
        double worst_adr = INFINITY, best_other = -INFINITY;
        for (const auto &e : ridge->exposures) {
            if (adrs.count(e.name)) worst_adr = std::min(worst_adr, e.coefficient);
            else best_other = std::max(best_other, e.coefficient);
        }
        v.b = worst_adr > best_other;
        v.note += fmt("ridge min ADR %.3f vs max other %.3f; ", worst_adr, best_other);
    }
    if (lasso) {
        std::size_t zeros = 0;
        bool conf_present = false;
        for (const auto &e : lasso->exposures) {
            if (plain.count(e.name) && e.coefficient == 0.0) ++zeros;
            conf_present |= e.name == "CONF_C";
        }
        v.c = zeros >= 1 && conf_present;
        v.note += fmt("lasso plain zeros %zu", zeros);
    }
    if (!r.unadjusted.empty()) {
        v.note = fmt("unadjusted top %s %.3f; ", r.unadjusted.front().name.c_str(), r.unadjusted.front().coefficient) +
                 v.note;
    }
    return v;
}

Outcome confounding_scenario(const std::filesystem::path &scenario) {
    auto config = PipelineConfig::load(scenario);
    config.output_dir = testsupport::temp_dir("acceptance_scenario");
    config.validate();
    const auto t0 = Clock::now();
    StageCounts counts;
    std::optional<std::uint64_t> synthesis_seed;
    const auto db = load_input(config, &synthesis_seed);
    const auto mining = run_mining(config, db, counts);
    std::vector<std::vector<std::string>> itemsets;
    for (const auto &p : mining.emergent.selected) itemsets.push_back(p.codes);
    const bool full_candidates = itemsets.size() == 2 * config.k;
    std::printf("  scenario: %zu patients, %zu cases, %zu controls, %zu candidate itemsets\n", counts.patients,
                counts.cases, counts.controls, itemsets.size());

    int held = 0;
    double first_run = 0.0;
    for (int s = 1; s <= kScenarioSeeds; ++s) {
        auto c = config;
        c.seed = static_cast<std::uint64_t>(s);
        // every alpha is fitted on the first seed (timed as a full run); later
        // seeds only need the ridge and lasso blocks, which do not depend on the others
        if (s > 1) c.alphas = {0.0, 1.0};
        const auto r = run_modelling(c, db, itemsets, counts);
        if (s == 1) first_run = seconds_since(t0);
        const auto v = judge(r);
        const bool ok = v.a && v.b && v.c && full_candidates;
        held += ok;
        std::printf("  seed %d: (a) %s (b) %s (c) %s  %s\n", s, v.a ? "yes" : "no", v.b ? "yes" : "no",
                    v.c ? "yes" : "no", v.note.c_str());
        std::fflush(stdout);
    }
    return {held >= kScenarioRequired && first_run < kScenarioSeconds,
            fmt("%d/%d seeds hold (need %d), %zu candidates, full run %.0fs (target %.0fs), all seeds %.0fs", held,
                kScenarioSeeds, kScenarioRequired, itemsets.size(), first_run, kScenarioSeconds, seconds_since(t0))};
}

// 8 -------------------------------------------------------------------------

Outcome determinism(const std::filesystem::path &scenario) {
    const auto dir = testsupport::temp_dir("acceptance_determinism");
    std::ifstream in(scenario.parent_path() / "confounding.spec");
    std::ostringstream spec;
    for (std::string line; std::getline(in, line);) {
        spec << (line.rfind("n_patients", 0) == 0 ? "n_patients = 10000" : line) << "\n";
    }
    std::ofstream(dir / "spec.txt") << spec.str();
    auto config = PipelineConfig::load(scenario);
    config.synthetic_spec_path = dir / "spec.txt";
    config.alphas = {0.0, 0.5, 1.0};
    config.seed = 11;
    std::string first;
    for (int run = 0; run < 2; ++run) {
        config.output_dir = dir / ("run" + std::to_string(run));
        emit_report(run_pipeline(config), {ReportFormat::Json}, config.output_dir);
        std::ifstream f(config.output_dir / "report.json", std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        if (run == 0) first = bytes;
        else return {bytes == first && !bytes.empty(), fmt("two runs, report.json %zu vs %zu bytes, %s", first.size(),
                                                           bytes.size(), bytes == first ? "identical" : "different")};
    }
    return {};
}

// 9 -------------------------------------------------------------------------

struct FixtureBuilder {
    std::vector<PatientRecord> patients;

    PatientRecord &add(const std::string &id, const std::string &practice, Sex sex, Date birth, Date reg,
                       std::optional<Date> exit = std::nullopt) {
        PatientRecord p;
        p.patient_id = id;
        p.practice_id = practice;
        p.sex = sex;
        p.birth_date = birth;
        p.registration_date = reg;
        p.exit_date = exit;
        patients.push_back(p);
        return patients.back();
    }
};

void drug(PatientRecord &p, Date d, const std::string &code = "DA") { p.events.push_back({d, code, EventKind::Drug}); }
void outcome(PatientRecord &p, Date d) { p.events.push_back({d, "OUT", EventKind::Medical}); }

Date ymd(int y, unsigned m, unsigned d) { return Date::from_ymd(y, m, d); }

Outcome study_design_fixture() {
    const auto F = Sex::Female;
    const auto M = Sex::Male;
    FixtureBuilder b;
    const Date reg = ymd(2005, 1, 1);

    // case-control side: outcomes in February 2012, each case in its own practice
    outcome(b.add("K_AGE17", "P01", F, ymd(1995, 1, 1), reg), ymd(2012, 2, 1));
    outcome(b.add("K_AGE18", "P02", F, ymd(1994, 1, 1), reg), ymd(2012, 2, 2));
    b.add("CT_18a", "P02", F, ymd(1993, 1, 1), reg);  // 19: within one year and in range
    b.add("CT_18b", "P02", F, ymd(1995, 1, 1), reg);  // 17: within one year but under 18
    outcome(b.add("K_AGE70", "P03", F, ymd(1942, 1, 1), reg), ymd(2012, 2, 3));
    b.add("CT_70a", "P03", F, ymd(1941, 1, 1), reg);  // 71
    b.add("CT_70b", "P03", F, ymd(1943, 1, 1), reg);  // 69
    b.add("CT_70c", "P03", F, ymd(1942, 1, 1), reg);  // 70
    outcome(b.add("K_AGE71", "P04", F, ymd(1941, 1, 1), reg), ymd(2012, 2, 4));
    outcome(b.add("K_HIST364", "P05", F, ymd(1962, 1, 1), ymd(2012, 2, 5) - 364), ymd(2012, 2, 5));
    outcome(b.add("K_HIST366", "P06", F, ymd(1962, 1, 1), ymd(2012, 2, 6) - 366), ymd(2012, 2, 6));
    b.add("CT_h364", "P06", F, ymd(1962, 1, 1), ymd(2012, 2, 6) - 364);
    b.add("CT_h366", "P06", F, ymd(1962, 1, 1), ymd(2012, 2, 6) - 366);
    {
        auto &p = b.add("K_EXPBEFORE", "P07", F, ymd(1962, 1, 1), reg);
        drug(p, ymd(2011, 6, 1));
        outcome(p, ymd(2012, 2, 7));
    }
    {
        auto &p = b.add("K_EXPONINDEX", "P08", F, ymd(1962, 1, 1), reg);
        drug(p, ymd(2012, 2, 8));
        outcome(p, ymd(2012, 2, 8));
    }
    drug(b.add("CT_expbefore", "P08", F, ymd(1962, 1, 1), reg), ymd(2012, 2, 7));
    drug(b.add("CT_exponidx", "P08", F, ymd(1962, 1, 1), reg), ymd(2012, 2, 8));
    drug(b.add("CT_expafter", "P08", F, ymd(1962, 1, 1), reg + 1), ymd(2012, 3, 1));
    b.add("CT_far", "P08", F, ymd(1962, 1, 1), ymd(2004, 1, 1)); // eligible, but registered furthest away
    {
        auto &p = b.add("K_SECONDOUT", "P09", F, ymd(1994, 6, 1), reg);
        outcome(p, ymd(2012, 2, 9)); // first outcome at 17
        outcome(p, ymd(2012, 7, 1)); // later one at 18 does not count
    }
    outcome(b.add("K_NOCTRL", "P10", F, ymd(1944, 1, 1), reg), ymd(2012, 2, 10));
    outcome(b.add("CT_everout", "P10", F, ymd(1944, 1, 1), reg), ymd(2016, 6, 1)); // outcome at 72: never a control
    b.add("CT_male", "P10", M, ymd(1944, 1, 1), reg);
    b.add("CT_age2", "P10", F, ymd(1946, 1, 1), reg);
    b.add("CT_regafter", "P10", F, ymd(1944, 1, 1), ymd(2012, 3, 1));
    b.add("CT_exited", "P10", F, ymd(1944, 1, 1), reg, ymd(2012, 1, 31));
    outcome(b.add("K_SHARE1", "P11", F, ymd(1962, 1, 1), reg), ymd(2012, 2, 11));
    outcome(b.add("K_SHARE2", "P11", F, ymd(1962, 1, 1), reg), ymd(2012, 2, 12));
    b.add("CT_s1", "P11", F, ymd(1962, 1, 1), reg);
    b.add("CT_s2", "P11", F, ymd(1962, 1, 1), reg + 2);
    b.add("CT_s3", "P11", F, ymd(1962, 1, 1), reg + 5);

    // cohort side: first prescriptions around the 2005-2010 window
    const Date creg = ymd(2000, 1, 1);
    const Date born = ymd(1967, 1, 1);
    drug(b.add("H_RX2004", "CO", M, born, creg), ymd(2004, 12, 31));
    drug(b.add("H_RX2005", "CO", M, born, creg), ymd(2005, 1, 1));
    drug(b.add("H_RX2010", "CO", M, born, creg), ymd(2010, 12, 31));
    drug(b.add("H_RX2011", "CO", M, born, creg), ymd(2011, 1, 1));
    {
        auto &p = b.add("H_FIRSTRX", "CO", M, born, creg);
        drug(p, ymd(2004, 6, 1));
        drug(p, ymd(2006, 6, 1));
    }
    const Date rx = ymd(2007, 6, 1);
    drug(b.add("H_AGE17", "CO", M, ymd(1990, 1, 1), creg), rx);
    drug(b.add("H_AGE18", "CO", M, ymd(1989, 1, 1), creg), rx);
    drug(b.add("H_AGE65", "CO", M, ymd(1942, 1, 1), creg), rx);
    drug(b.add("H_AGE66", "CO", M, ymd(1941, 1, 1), creg), rx);
    drug(b.add("H_HIST364", "CO", M, born, rx - 364), rx);
    drug(b.add("H_HIST366", "CO", M, born, rx - 366), rx);
    {
        auto &p = b.add("H_EVENT", "CO", M, born, creg);
        drug(p, ymd(2007, 3, 1));
        outcome(p, ymd(2008, 1, 1));
    }
    {
        // alone in its practice: also a case (exposure on, not before, the outcome) without controls
        auto &p = b.add("H_ONINDEX", "CX", M, born, creg);
        drug(p, ymd(2007, 3, 1));
        outcome(p, ymd(2007, 3, 1));
    }
    {
        auto &p = b.add("H_FOLLOWCAP", "CO", M, born, creg);
        drug(p, ymd(2006, 1, 1));
        outcome(p, ymd(2011, 1, 5));
    }
    {
        auto &p = b.add("H_EVENTCAP", "CO", M, born, creg);
        drug(p, ymd(2006, 1, 1));
        outcome(p, ymd(2010, 12, 31)); // day 1825
    }
    drug(b.add("H_EXIT", "CO", M, born, creg, ymd(2008, 1, 1)), ymd(2007, 1, 1));
    drug(b.add("H_ZERO", "CO", M, born, creg, ymd(2007, 1, 1)), ymd(2007, 1, 1));
    {
        auto &p = b.add("H_TWO", "CO", M, born, creg);
        drug(p, ymd(2006, 1, 1), "DA");
        drug(p, ymd(2007, 1, 1), "DB");
    }
    {
        auto &p = b.add("H_DBPRE", "CO", M, born, creg);
        drug(p, ymd(2004, 1, 1), "DB");
        drug(p, ymd(2006, 1, 1), "DA");
    }

    const PatientDatabase db(b.patients, ymd(2016, 12, 31));
    StudyCriteria c;
    c.outcome_codes = {"OUT"};
    c.exposure_codes = {"DA", "DB"};

    std::vector<std::string> errors;
    if (db.size() != 50) errors.push_back(fmt("fixture has %zu patients", db.size()));
    if (!validate_database(db).empty()) errors.push_back("fixture violates record invariants");

    // cases, in matching order
    const std::vector<std::string> want_cases{"H_ONINDEX", "K_AGE18",  "K_AGE70",  "K_HIST366",
                                              "K_EXPONINDEX", "K_NOCTRL", "K_SHARE1", "K_SHARE2"};
    const auto cases = select_cases(db, c);
    std::vector<std::string> got_cases;
    for (const auto &k : cases) got_cases.push_back(k.patient_id);
    if (got_cases != want_cases) errors.push_back("case list differs");

    // controls per retained case
    const std::map<std::string, std::set<std::string>> want_controls{
        {"K_AGE18", {"CT_18a"}},
        {"K_AGE70", {"CT_70b", "CT_70c"}},
        {"K_HIST366", {"CT_h366"}},
        {"K_EXPONINDEX", {"CT_exponidx", "CT_expafter"}},
        {"K_SHARE1", {"CT_s1", "CT_s2"}},
        {"K_SHARE2", {"CT_s3"}},
    };
    const auto ccs = match_controls(db, cases, c);
    std::map<std::string, std::set<std::string>> got_controls;
    for (std::size_t k = 0; k < ccs.cases.size(); ++k) {
        auto &s = got_controls[ccs.cases[k].patient_id];
        for (const auto &ctrl : ccs.controls[k]) {
            s.insert(ctrl.patient_id);
            if (ctrl.index_date != ccs.cases[k].index_date) errors.push_back("control index differs from its case");
        }
    }
    for (const auto &[k, want] : want_controls) {
        if (got_controls[k] != want) errors.push_back("controls of " + k + " differ");
    }
    if (got_controls.size() != want_controls.size()) errors.push_back("retained case count differs");
    if (ccs.dropped_cases != 2) errors.push_back(fmt("dropped cases %zu, expected 2", ccs.dropped_cases));

    // cohort rows: id:exposure -> (days, event, history bits)
    using Row = std::tuple<int, bool, std::string>;
    const std::map<std::string, Row> want_rows{
        {"H_RX2005:DA", {1825, false, "10"}},   {"H_RX2010:DA", {1825, false, "10"}},
        {"H_AGE18:DA", {1825, false, "10"}},    {"H_AGE65:DA", {1825, false, "10"}},
        {"H_HIST366:DA", {1825, false, "10"}},  {"H_EVENT:DA", {306, true, "10"}},
        {"H_ONINDEX:DA", {1825, false, "10"}},  {"H_FOLLOWCAP:DA", {1825, false, "10"}},
        {"H_EVENTCAP:DA", {1825, true, "10"}},  {"H_EXIT:DA", {365, false, "10"}},
        {"H_TWO:DA", {1825, false, "10"}},      {"H_TWO:DB", {1825, false, "11"}},
        {"H_DBPRE:DA", {1825, false, "11"}},
    };
    const auto cohort = build_cohort(db, c);
    std::map<std::string, Row> got_rows;
    for (const auto &r : cohort.rows) {
        std::string bits;
        for (auto v : r.exposure_history) bits += v ? '1' : '0';
        got_rows[r.patient_id + ":" + r.exposure_code] = {r.survival_time, r.event, bits};
    }
    for (const auto &[key, want] : want_rows) {
        auto it = got_rows.find(key);
        if (it == got_rows.end()) errors.push_back("missing cohort row " + key);
        else if (it->second != want) errors.push_back("cohort row " + key + " differs");
    }
    for (const auto &[key, row] : got_rows) {
        if (!want_rows.count(key)) errors.push_back("unexpected cohort row " + key);
    }
    if (cohort.zero_time_dropped != 1) errors.push_back("zero-time drop count differs");
    if (cohort.multi_row_patients != 1) errors.push_back("multi-row patient count differs");

    std::string detail = fmt("%zu patients: %zu cases (%zu retained, %zu dropped), %zu controls, %zu cohort rows",
                             db.size(), cases.size(), ccs.cases.size(), ccs.dropped_cases, ccs.control_count(),
                             cohort.rows.size());
    for (const auto &e : errors) detail += "; " + e;
    return {errors.empty(), detail};
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance criteria"};
    std::filesystem::path scenario = ADRREFINE_SCENARIO;
    std::vector<int> only;
    app.add_option("--scenario", scenario, "Confounding scenario config")->check(CLI::ExistingFile);
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"miner equals exhaustive enumeration", miner_oracle},
        {"bias-lift spot value and branches", bias_lift_spot},
        {"elastic net vs Newton, KKT along the path", solver_oracle},
        {"analytic vs finite-difference gradient", gradient_check},
        {"hazard-ratio transform", hr_transform},
        {"concordance and time-dependent AUC oracles", metric_oracles},
        {"end-to-end confounding scenario", [&] { return confounding_scenario(scenario); }},
        {"byte-identical reports", [&] { return determinism(scenario); }},
        {"study-design fixture", study_design_fixture},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
