/*
 * @file pipeline.cpp
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
#include "adrrefine/pipeline.hpp"

#include "adrrefine/ph_diagnostic.hpp"
#include "adrrefine/random.hpp"
#include "adrrefine/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adrrefine {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string> &items, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
    return out;
}

std::string path_string(const std::filesystem::path &p) { return p.generic_string(); }

std::filesystem::path resolve(const PipelineConfig &c, const std::filesystem::path &p) {
    if (p.empty() || p.is_absolute() || c.base_dir.empty()) return p;
    return c.base_dir / p;
}

template <class F>
auto in_stage(const char *name, const StageCounts &counts, const ProgressFn &progress, F &&f) {
    if (progress) progress(name);
    try {
        return f();
    } catch (const PipelineError &) {
        throw;
    } catch (const std::exception &e) {
        throw PipelineError(name, e.what(), counts);
    }
}

} // namespace

PipelineConfig PipelineConfig::from_kv(const KeyValueConfig &cfg) {
    PipelineConfig c;
    c.demographics_path = cfg.get_string("demographics", "");
    c.events_path = cfg.get_string("events", "");
    c.synthetic_spec_path = cfg.get_string("synthetic_spec", "");
    if (cfg.contains("data_end")) c.data_end = cfg.get_date("data_end", Date{});
    const auto mode = cfg.get_string("load_mode", "strict");
    if (mode == "strict") c.load_mode = LoadMode::Strict;
    else if (mode == "lenient") c.load_mode = LoadMode::Lenient;
    else throw ConfigError(cfg.source() + ": key 'load_mode': expected strict or lenient, got '" + mode + "'");
    c.candidates_path = cfg.get_string("candidates", "");

    auto &s = c.criteria;
    s.outcome_codes = cfg.get_list("outcome_codes", {});
    s.exposure_codes = cfg.get_list("exposure_codes", {});
    s.case_min_age = static_cast<int>(cfg.get_int("case_min_age", s.case_min_age));
    s.case_max_age = static_cast<int>(cfg.get_int("case_max_age", s.case_max_age));
    s.cohort_min_age = static_cast<int>(cfg.get_int("cohort_min_age", s.cohort_min_age));
    s.cohort_max_age = static_cast<int>(cfg.get_int("cohort_max_age", s.cohort_max_age));
    s.min_history_days = static_cast<int>(cfg.get_int("min_history_days", s.min_history_days));
    s.cohort_start = cfg.get_date("cohort_start", s.cohort_start);
    s.cohort_end = cfg.get_date("cohort_end", s.cohort_end);
    s.followup_days = static_cast<int>(cfg.get_int("followup_days", s.followup_days));
    s.controls_per_case = static_cast<std::size_t>(cfg.get_int("controls_per_case", static_cast<std::int64_t>(s.controls_per_case)));
    s.age_match_tolerance = static_cast<int>(cfg.get_int("age_match_tolerance", s.age_match_tolerance));

    auto get_size = [&](const char *key, std::size_t fallback) {
        const auto v = cfg.get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 0) throw ConfigError(cfg.source() + ": key '" + key + "': must not be negative");
        return static_cast<std::size_t>(v);
    };
    c.minsup_primary = cfg.get_double("minsup_primary", c.minsup_primary);
    c.minsup_secondary = cfg.get_double("minsup_secondary", c.minsup_secondary);
    c.max_size = get_size("max_size", c.max_size);
    c.k = get_size("k", c.k);
    c.min_itemset_size = get_size("min_itemset_size", c.min_itemset_size);
    c.max_itemsets = get_size("max_itemsets", c.max_itemsets);

    c.alphas = cfg.get_double_list("alphas", c.alphas);
    c.folds = get_size("folds", c.folds);
    c.n_lambda = get_size("n_lambda", c.n_lambda);
    c.lambda_min_ratio = cfg.get_double("lambda_min_ratio", c.lambda_min_ratio);
    c.solver_tolerance = cfg.get_double("solver_tolerance", c.solver_tolerance);
    c.penalize_demographics = cfg.get_bool("penalize_demographics", c.penalize_demographics);
    c.standardize_age = cfg.get_bool("standardize_age", c.standardize_age);
    c.ph_level = cfg.get_double("ph_level", c.ph_level);

    c.train_fraction = cfg.get_double("train_fraction", c.train_fraction);
    if (cfg.contains("horizon_days")) c.horizon_days = static_cast<int>(cfg.get_int("horizon_days", 0));

    const auto seed = cfg.get_int("seed", static_cast<std::int64_t>(c.seed));
    if (seed < 0) throw ConfigError(cfg.source() + ": key 'seed': must not be negative");
    c.seed = static_cast<std::uint64_t>(seed);
    c.output_dir = cfg.get_string("output_dir", path_string(c.output_dir));
    c.threads = get_size("threads", c.threads);
    c.keep_intermediate = cfg.get_bool("keep_intermediate", c.keep_intermediate);
    if (cfg.contains("formats")) {
        c.formats.clear();
        for (const auto &f : cfg.get_list("formats", {})) {
            try {
                c.formats.insert(parse_report_format(f));
            } catch (const std::invalid_argument &e) {
                throw ConfigError(cfg.source() + ": key 'formats': " + e.what());
            }
        }
    }
    cfg.reject_unknown_keys();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path &path) {
    auto c = from_kv(KeyValueConfig::load(path));
    c.base_dir = path.parent_path();
    return c;
}

void PipelineConfig::validate() const {
    auto fail = [](const std::string &key, const std::string &msg) { throw ConfigError("config '" + key + "': " + msg); };
    const bool has_log = !demographics_path.empty() || !events_path.empty();
    if (has_log && (demographics_path.empty() || events_path.empty())) {
        fail("demographics", "demographics and events must be given together");
    }
    if (has_log == !synthetic_spec_path.empty()) fail("synthetic_spec", "give either an event log or a synthetic spec");
    if (criteria.exposure_codes.empty()) fail("exposure_codes", "no exposures to analyse");
    if (criteria.outcome_codes.empty()) fail("outcome_codes", "no outcome codes");
    try {
        validate_criteria(criteria);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (!(minsup_primary > 0.0 && minsup_primary <= 1.0)) fail("minsup_primary", "must lie in (0, 1]");
    if (!(minsup_secondary > 0.0 && minsup_secondary <= minsup_primary)) fail("minsup_secondary", "must lie in (0, minsup_primary]");
    if (max_size < 1) fail("max_size", "must be at least 1");
    if (k < 1) fail("k", "must be at least 1");
    if (min_itemset_size < 1 || min_itemset_size > max_size) fail("min_itemset_size", "must lie in [1, max_size]");
    if (alphas.empty()) fail("alphas", "no penalty mixes given");
    for (double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) fail("alphas", "each alpha must lie in [0, 1]");
    }
    if (std::set<double>(alphas.begin(), alphas.end()).size() != alphas.size()) fail("alphas", "duplicate alpha");
    if (folds < 2) fail("folds", "need at least 2");
    if (n_lambda < 2) fail("n_lambda", "need at least 2");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) fail("lambda_min_ratio", "must lie in (0, 1)");
    if (!(solver_tolerance > 0.0)) fail("solver_tolerance", "must be positive");
    if (!(ph_level > 0.0 && ph_level < 1.0)) fail("ph_level", "must lie in (0, 1)");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction", "must lie in (0, 1)");
    if (horizon_days && *horizon_days <= 0) fail("horizon_days", "must be positive");
    if (threads < 1) fail("threads", "must be at least 1");
    if (formats.empty()) fail("formats", "no report format selected");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::canonical() const {
    const auto &s = criteria;
    std::vector<std::string> alpha_text;
    for (double a : alphas) alpha_text.push_back(format_double(a));
    std::vector<std::pair<std::string, std::string>> out{
        {"demographics", path_string(demographics_path)},
        {"events", path_string(events_path)},
        {"synthetic_spec", path_string(synthetic_spec_path)},
        {"data_end", data_end ? data_end->to_string() : ""},
        {"load_mode", load_mode == LoadMode::Strict ? "strict" : "lenient"},
        {"candidates", path_string(candidates_path)},
        {"outcome_codes", join(s.outcome_codes)},
        {"exposure_codes", join(s.exposure_codes)},
        {"case_min_age", std::to_string(s.case_min_age)},
        {"case_max_age", std::to_string(s.case_max_age)},
        {"cohort_min_age", std::to_string(s.cohort_min_age)},
        {"cohort_max_age", std::to_string(s.cohort_max_age)},
        {"min_history_days", std::to_string(s.min_history_days)},
        {"cohort_start", s.cohort_start.to_string()},
        {"cohort_end", s.cohort_end.to_string()},
        {"followup_days", std::to_string(s.followup_days)},
        {"controls_per_case", std::to_string(s.controls_per_case)},
        {"age_match_tolerance", std::to_string(s.age_match_tolerance)},
        {"minsup_primary", format_double(minsup_primary)},
        {"minsup_secondary", format_double(minsup_secondary)},
        {"max_size", std::to_string(max_size)},
        {"k", std::to_string(k)},
        {"min_itemset_size", std::to_string(min_itemset_size)},
        {"max_itemsets", std::to_string(max_itemsets)},
        {"alphas", join(alpha_text)},
        {"folds", std::to_string(folds)},
        {"n_lambda", std::to_string(n_lambda)},
        {"lambda_min_ratio", format_double(lambda_min_ratio)},
        {"solver_tolerance", format_double(solver_tolerance)},
        {"penalize_demographics", penalize_demographics ? "true" : "false"},
        {"standardize_age", standardize_age ? "true" : "false"},
        {"ph_level", format_double(ph_level)},
        {"train_fraction", format_double(train_fraction)},
        {"horizon_days", horizon_days ? std::to_string(*horizon_days) : ""},
        {"seed", std::to_string(seed)},
    };
    std::sort(out.begin(), out.end());
    return out;
}

std::string PipelineConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const std::string &s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff; // field separator
        h *= 0x100000001b3ULL;
    };
    for (const auto &[k, v] : canonical()) {
        feed(k);
        feed(v);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineError::PipelineError(std::string stage, const std::string &message, const StageCounts &counts)
    : std::runtime_error("stage '" + stage + "' failed: " + message + " [upstream counts: " + describe(counts) + "]"),
      stage_{std::move(stage)}, counts_{counts} {}

StageSeeds derive_stage_seeds(std::uint64_t master) {
    return {derive_seed(master, "split"), derive_seed(master, "cv"), derive_seed(master, "synthesis")};
}

PatientDatabase load_input(const PipelineConfig &config, std::optional<std::uint64_t> *synthesis_seed) {
    if (!config.synthetic_spec_path.empty()) {
        const auto kv = KeyValueConfig::load(resolve(config, config.synthetic_spec_path));
        auto spec = parse_synthetic_spec(kv);
        // a seed pinned in the spec file wins over the master-seed derivation
        if (!kv.contains("seed")) spec.seed = derive_stage_seeds(config.seed).synthesis;
        if (synthesis_seed) *synthesis_seed = spec.seed;
        return generate_synthetic(spec);
    }
    auto res = load_event_log(resolve(config, config.demographics_path), resolve(config, config.events_path),
                              config.load_mode, config.data_end);
    return std::move(res.database);
}

MiningOutcome run_mining(const PipelineConfig &config, const PatientDatabase &db, StageCounts &counts,
                         const ProgressFn &progress) {
    MiningOutcome out;
    counts.patients = db.size();
    const auto cases = in_stage("select_cases", counts, progress, [&] { return select_cases(db, config.criteria); });
    if (cases.empty()) throw PipelineError("select_cases", "no patient qualifies as a case", counts);
    out.case_control = in_stage("match_controls", counts, progress, [&] { return match_controls(db, cases, config.criteria); });
    counts.cases = out.case_control.cases.size();
    counts.cases_dropped = out.case_control.dropped_cases;
    counts.controls = out.case_control.control_count();
    if (counts.cases == 0) throw PipelineError("match_controls", "no case could be matched to a control", counts);

    std::tie(out.d1, out.d2) = in_stage("build_transaction_dbs", counts, progress,
                                        [&] { return build_transaction_dbs(db, out.case_control); });
    counts.d1_transactions = out.d1.size();
    counts.d2_transactions = out.d2.size();

    EmergentOptions eo;
    eo.minsup_primary = config.minsup_primary;
    eo.minsup_secondary = config.minsup_secondary;
    eo.max_size = config.max_size;
    eo.min_itemset_size = config.min_itemset_size;
    eo.k = config.k;
    eo.max_itemsets = config.max_itemsets;
    eo.excluded_codes = config.criteria.exposure_codes;
    out.emergent = in_stage("emergent_patterns", counts, progress, [&] { return emergent_patterns(out.d1, out.d2, eo); });
    const auto &em = out.emergent;
    counts.frequent_d1_primary = em.frequent_d1_primary;
    counts.frequent_d1_secondary = em.frequent_d1_secondary;
    counts.frequent_d2_primary = em.frequent_d2_primary;
    counts.frequent_d2_secondary = em.frequent_d2_secondary;
    counts.positive_candidates = em.positive_candidates;
    counts.negative_candidates = em.negative_candidates;
    counts.excluded_itemsets = em.excluded_itemsets;
    counts.selected_itemsets = em.selected.size();

    if (config.keep_intermediate) {
        in_stage("write_intermediate", counts, progress, [&] {
            const auto dir = config.output_dir / "intermediate";
            std::filesystem::create_directories(dir);
            write_case_control_csv(dir / "case_control.csv", out.case_control);
            em.table_d1.write_csv(dir / "itemsets_d1.csv", out.d1.dictionary());
            em.table_d2.write_csv(dir / "itemsets_d2.csv", out.d2.dictionary());
            write_emergent_csv(dir / "emergent_patterns.csv", em.selected);
            return 0;
        });
    }
    return out;
}

namespace {

void write_path_csv(const std::filesystem::path &path, const CoxFitPath &fit) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "lambda,covariate,coefficient\n";
    for (std::size_t k = 0; k < fit.lambdas.size(); ++k) {
        for (std::size_t j = 0; j < fit.names.size(); ++j) {
            out << fit.lambdas[k] << ',' << fit.names[j] << ','
                << fit.coefficients(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) << '\n';
        }
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

ConsistencyCheck check(std::string name, bool passed, std::string detail) {
    return {std::move(name), passed, std::move(detail)};
}

} // namespace

SignalReport run_modelling(const PipelineConfig &config, const PatientDatabase &db,
                           const std::vector<std::vector<std::string>> &itemsets, StageCounts counts,
                           const ProgressFn &progress) {
    const auto &crit = config.criteria;
    const auto seeds = derive_stage_seeds(config.seed);
    SignalReport report;
    report.exposures = crit.exposure_codes;
    if (counts.patients == 0) counts.patients = db.size();

    auto cohort = in_stage("build_cohort", counts, progress, [&] { return build_cohort(db, crit); });
    counts.cohort_rows = cohort.rows.size();
    counts.zero_time_dropped = cohort.zero_time_dropped;
    counts.multi_row_patients = cohort.multi_row_patients;
    for (const auto &r : cohort.rows) counts.cohort_events += r.event;
    if (counts.cohort_events == 0) throw PipelineError("build_cohort", "the cohort has no outcome events", counts);

    const auto dm = in_stage("assemble_design_matrix", counts, progress, [&] {
        return assemble_design_matrix(db, cohort.rows, itemsets, crit, DesignOptions{config.standardize_age});
    });
    counts.design_columns = dm.data.p();
    if (config.keep_intermediate) {
        in_stage("write_intermediate", counts, progress, [&] {
            const auto dir = config.output_dir / "intermediate";
            std::filesystem::create_directories(dir);
            write_cohort_csv(dir / "cohort.csv", cohort.rows, crit);
            write_design_matrix_csv(dir / "design_matrix.csv", dm);
            return 0;
        });
    }

    const auto split = in_stage("split_train_test", counts, progress,
                                [&] { return split_train_test(dm.data.event(), config.train_fraction, seeds.split); });
    const SurvivalData train = dm.data.subset(split.train);
    const SurvivalData test = dm.data.subset(split.test);
    counts.train_rows = train.n();
    counts.train_events = train.n_events();
    counts.test_rows = test.n();
    counts.test_events = test.n_events();
    const double horizon = config.horizon_days.value_or(crit.followup_days);

    // unadjusted model: age, sex and the exposure indicators only
    std::vector<std::size_t> base_cols{0, 1};
    base_cols.insert(base_cols.end(), dm.exposure_columns.begin(), dm.exposure_columns.end());
    const SurvivalData train_base = train.select_columns(base_cols);
    const auto unadjusted = in_stage("fit_unadjusted", counts, progress, [&] { return fit_cox(train_base); });
    const auto ph = in_stage("ph_diagnostic", counts, progress,
                             [&] { return check_proportional_hazards(unadjusted, train_base, config.ph_level); });
    report.ph_flagged = ph.flagged_count();
    {
        const std::vector<double> coef(unadjusted.coefficients.data(),
                                       unadjusted.coefficients.data() + unadjusted.coefficients.size());
        for (const auto &r : rank_exposures(coef, train_base.names(), crit.exposure_codes)) {
            const auto j = *train_base.column_index(r.name);
            const auto ci = unadjusted.hazard_ratio_interval(j);
            UnadjustedRow row{r.rank, r.name, r.coefficient, r.hazard_ratio, ci.lower, ci.upper, std::nullopt};
            if (ph.covariates[j].tested) row.ph_p_value = ph.covariates[j].p_value;
            report.unadjusted.push_back(row);
        }
        const auto scores = test.select_columns(base_cols).linear_predictor(coef);
        const auto v = in_stage("validate_unadjusted", counts, progress, [&] { return validate_scores(scores, test, horizon); });
        report.validation.push_back({"unadjusted", std::nullopt, std::nullopt, v.concordance, v.auc_summary, v.n_comparable_pairs});
    }

    CvOptions cv;
    cv.folds = config.folds;
    cv.seed = seeds.cv;
    cv.path.n_lambda = config.n_lambda;
    cv.path.lambda_min_ratio = config.lambda_min_ratio;
    cv.path.tolerance = config.solver_tolerance;
    cv.path.threads = config.threads;
    if (!config.penalize_demographics) {
        cv.path.penalty_factor.assign(train.p(), 1.0);
        cv.path.penalty_factor[0] = cv.path.penalty_factor[1] = 0.0;
    }
    const bool dump_paths = config.formats.count(ReportFormat::Csv) > 0;
    for (double alpha : config.alphas) {
        const std::string label = "alpha=" + format_double(alpha);
        const auto fit = in_stage(("cross_validate " + label).c_str(), counts, progress,
                                  [&] { return cross_validate(train, alpha, cv); });
        const std::size_t star = fit.index_star.value();
        const auto coef = fit.coefficients_at(star);
        AlphaBlock block;
        block.alpha = alpha;
        block.lambda_star = fit.lambda_star();
        block.lambda_min = fit.lambda_min();
        block.lambda_count = fit.lambdas.size();
        block.nonzero = fit.nonzero[star];
        block.exposures = rank_exposures(coef, train.names(), crit.exposure_codes);
        block.warnings = fit.warnings;
        report.alphas.push_back(block);

        const auto scores = test.linear_predictor(coef);
        const auto v = in_stage(("validate " + label).c_str(), counts, progress,
                                [&] { return validate_scores(scores, test, horizon); });
        report.validation.push_back({label, alpha, block.lambda_star, v.concordance, v.auc_summary, v.n_comparable_pairs});
        if (dump_paths) {
            in_stage("write_path", counts, progress, [&] {
                std::filesystem::create_directories(config.output_dir);
                write_path_csv(config.output_dir / ("path_alpha_" + format_double(alpha) + ".csv"), fit);
                return 0;
            });
        }
    }

    for (const auto &codes : itemsets) {
        SelectedItemset s;
        s.codes = codes;
        std::sort(s.codes.begin(), s.codes.end());
        s.direction = "given";
        report.itemsets.push_back(std::move(s));
    }

    auto &checks = report.checks;
    if (counts.cases > 0) {
        checks.push_back(check("controls_per_case", counts.controls <= crit.controls_per_case * counts.cases,
                               std::to_string(counts.controls) + " controls for " + std::to_string(counts.cases) + " cases"));
        checks.push_back(check("d1_equals_cases", counts.d1_transactions == counts.cases,
                               std::to_string(counts.d1_transactions) + " case baskets"));
        checks.push_back(check("d2_equals_controls", counts.d2_transactions == counts.controls,
                               std::to_string(counts.d2_transactions) + " control baskets"));
        checks.push_back(check("selected_within_2k", counts.selected_itemsets <= 2 * config.k,
                               std::to_string(counts.selected_itemsets) + " selected, k = " + std::to_string(config.k)));
    }
    const std::size_t expected_cols = 2 + crit.exposure_codes.size() + itemsets.size();
    checks.push_back(check("design_columns", counts.design_columns == expected_cols,
                           std::to_string(counts.design_columns) + " columns, expected " + std::to_string(expected_cols)));
    checks.push_back(check("split_partition", counts.train_rows + counts.test_rows == counts.cohort_rows,
                           std::to_string(counts.train_rows) + " + " + std::to_string(counts.test_rows)));
    bool every_block = report.unadjusted.size() == crit.exposure_codes.size();
    for (const auto &b : report.alphas) every_block = every_block && b.exposures.size() == crit.exposure_codes.size();
    checks.push_back(check("exposures_in_every_block", every_block, std::to_string(crit.exposure_codes.size()) + " exposures"));

    report.provenance.config_hash = config.hash();
    report.provenance.seed = config.seed;
    report.provenance.split_seed = seeds.split;
    report.provenance.cv_seed = seeds.cv;
    report.provenance.config = config.canonical();
    report.provenance.counts = counts;
    return report;
}

SignalReport run_pipeline(const PipelineConfig &config, const ProgressFn &progress) {
    StageCounts counts;
    in_stage("validate_config", counts, progress, [&] {
        config.validate();
        return 0;
    });
    std::optional<std::uint64_t> synthesis_seed;
    const auto db = in_stage("load_input", counts, progress, [&] { return load_input(config, &synthesis_seed); });
    counts.patients = db.size();
    const auto mining = run_mining(config, db, counts, progress);

    std::vector<std::vector<std::string>> itemsets;
    for (const auto &p : mining.emergent.selected) itemsets.push_back(p.codes);
    auto report = run_modelling(config, db, itemsets, counts, progress);
    report.itemsets.clear();
    for (const auto &p : mining.emergent.selected) {
        report.itemsets.push_back({p.codes, std::string(to_string(p.direction)), p.supp_d1, p.supp_d2, p.selected_lift()});
    }
    report.provenance.synthesis_seed = synthesis_seed;
    return report;
}

std::vector<std::vector<std::string>> read_itemset_list(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open itemset list " + path.string());
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            first = false;
            if (line.rfind("itemset,", 0) == 0 || line.rfind("itemset;", 0) == 0) continue; // header
        }
        const auto field = line.substr(0, line.find_first_of(",;"));
        std::vector<std::string> codes;
        std::stringstream ss(field);
        std::string code;
        while (std::getline(ss, code, '|')) {
            if (!code.empty()) codes.push_back(code);
        }
        if (codes.empty()) throw std::runtime_error(path.string() + ": empty itemset in line '" + line + "'");
        out.push_back(std::move(codes));
    }
    return out;
}

} // namespace adrrefine
