/*
 * @file adrrefine.cpp
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
#include "adrrefine/synthetic.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>

using namespace adrrefine;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
    bool keep_intermediate = false;
    bool strict = false;
    bool lenient = false;
    bool quiet = false;
};

PipelineConfig resolve_config(const Common &o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : PipelineConfig::load(o.config);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    if (o.threads) c.threads = *o.threads;
    if (o.keep_intermediate) c.keep_intermediate = true;
    if (o.strict) c.load_mode = LoadMode::Strict;
    if (o.lenient) c.load_mode = LoadMode::Lenient;
    return c;
}

ProgressFn progress_printer(bool quiet) {
    if (quiet) return {};
    const auto start = std::chrono::steady_clock::now();
    return [start](const std::string &stage) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::fprintf(stderr, "[%8.1fs] %s\n", s, stage.c_str());
    };
}

int finish_report(const SignalReport &report, const PipelineConfig &c) {
    for (const auto &p : emit_report(report, c.formats, c.output_dir)) std::cout << p.string() << "\n";
    if (!report.all_checks_passed()) {
        for (const auto &ch : report.checks) {
            if (!ch.passed) std::cerr << "consistency check failed: " << ch.name << " (" << ch.detail << ")\n";
        }
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Confounder-adjusted ranking of adverse drug reaction signals from longitudinal records"};
    app.require_subcommand(1);
    Common o;
    app.add_option("--config", o.config, "Pipeline config file (flat key = value)");
    app.add_option("--seed", o.seed, "Master seed; overrides the config");
    app.add_option("--out", o.out, "Output directory; overrides the config");
    app.add_option("--threads", o.threads, "Worker threads for cross-validation")->check(CLI::PositiveNumber);
    app.add_flag("--keep-intermediate", o.keep_intermediate, "Write case-control, itemset and design-matrix dumps");
    auto *strict = app.add_flag("--strict", o.strict, "Fail on any rejected input row (default)");
    app.add_flag("--lenient", o.lenient, "Drop rejected input rows and count them")->excludes(strict);
    app.add_flag("-q,--quiet", o.quiet, "No stage progress on stderr");

    auto *synth = app.add_subcommand("synth", "Generate a synthetic event log from a spec");
    std::string spec_path;
    synth->add_option("--spec", spec_path, "Synthetic spec; defaults to the config's synthetic_spec");
    synth->fallthrough();

    auto *mine = app.add_subcommand("mine", "Step 1 only: case-control extraction and emergent itemsets");
    mine->fallthrough();

    auto *fit = app.add_subcommand("fit", "Step 2 only: cohort models adjusted for a given itemset list");
    std::string candidates;
    fit->add_option("--candidates", candidates, "Itemset list (emergent-pattern CSV or one A|B per line)");
    fit->fallthrough();

    auto *run = app.add_subcommand("run", "Full pipeline");
    run->fallthrough();

    auto *rep = app.add_subcommand("report", "Re-render a saved report.json");
    std::string input;
    std::vector<std::string> formats;
    rep->add_option("--input", input, "report.json to re-render")->required()->check(CLI::ExistingFile);
    rep->add_option("--format", formats, "json, csv or markdown (repeatable); defaults to markdown");
    rep->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        auto c = resolve_config(o);
        const auto progress = progress_printer(o.quiet);

        if (*synth) {
            if (!spec_path.empty()) {
                c.synthetic_spec_path = spec_path;
                c.base_dir.clear();
            }
            if (c.synthetic_spec_path.empty()) throw ConfigError("synth needs --spec or synthetic_spec in the config");
            c.demographics_path.clear();
            c.events_path.clear();
            std::optional<std::uint64_t> used;
            const auto db = load_input(c, &used);
            std::filesystem::create_directories(c.output_dir);
            write_event_log(db, c.output_dir / "demographics.csv", c.output_dir / "events.csv");
            std::cout << (c.output_dir / "demographics.csv").string() << "\n" << (c.output_dir / "events.csv").string() << "\n";
            std::cerr << db.size() << " patients, " << db.event_count() << " events, seed " << *used << "\n";
            return 0;
        }
        if (*mine) {
            c.validate();
            StageCounts counts;
            const auto db = load_input(c);
            const auto m = run_mining(c, db, counts, progress);
            std::filesystem::create_directories(c.output_dir);
            write_emergent_csv(c.output_dir / "emergent_patterns.csv", m.emergent.selected);
            write_case_control_csv(c.output_dir / "case_control.csv", m.case_control);
            m.emergent.table_d1.write_csv(c.output_dir / "itemsets_d1.csv", m.d1.dictionary());
            m.emergent.table_d2.write_csv(c.output_dir / "itemsets_d2.csv", m.d2.dictionary());
            std::cout << (c.output_dir / "emergent_patterns.csv").string() << "\n";
            std::cerr << describe(counts) << "\n";
            return 0;
        }
        if (*fit) {
            if (!candidates.empty()) c.candidates_path = std::filesystem::absolute(candidates);
            if (c.candidates_path.empty()) throw ConfigError("fit needs --candidates or candidates in the config");
            c.validate();
            const auto path = c.candidates_path.is_absolute() || c.base_dir.empty() ? c.candidates_path
                                                                                    : c.base_dir / c.candidates_path;
            const auto itemsets = read_itemset_list(path);
            std::optional<std::uint64_t> used;
            const auto db = load_input(c, &used);
            auto report = run_modelling(c, db, itemsets, StageCounts{}, progress);
            report.provenance.synthesis_seed = used;
            return finish_report(report, c);
        }
        if (*run) {
            return finish_report(run_pipeline(c, progress), c);
        }
        if (*rep) {
            std::set<ReportFormat> fs;
            for (const auto &f : formats) fs.insert(parse_report_format(f));
            if (formats.empty()) fs.insert(ReportFormat::Markdown);
            const auto report = load_report(input);
            for (const auto &p : emit_report(report, fs, c.output_dir)) std::cout << p.string() << "\n";
            return 0;
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
