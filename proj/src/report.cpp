/*
 * @file report.cpp
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
#include "adrrefine/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace adrrefine {

using json = nlohmann::ordered_json;

void to_json(json &j, const RankedExposure &r) {
    j = json{{"name", r.name},
             {"coefficient", r.coefficient},
             {"rank", r.rank},
             {"overall_rank", r.overall_rank},
             {"hazard_ratio", r.hazard_ratio},
             {"status", r.filtered ? "filtered" : "ranked"}};
}

void from_json(const json &j, RankedExposure &r) {
    j.at("name").get_to(r.name);
    j.at("coefficient").get_to(r.coefficient);
    j.at("rank").get_to(r.rank);
    j.at("overall_rank").get_to(r.overall_rank);
    j.at("hazard_ratio").get_to(r.hazard_ratio);
    r.filtered = j.at("status").get<std::string>() == "filtered";
}

namespace {

template <class T>
json optional_json(const std::optional<T> &v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

#define ADR_COUNT_FIELDS(X)                                                                                           \
    X(patients) X(cases) X(cases_dropped) X(controls) X(d1_transactions) X(d2_transactions) X(frequent_d1_primary)  \
    X(frequent_d1_secondary) X(frequent_d2_primary) X(frequent_d2_secondary) X(positive_candidates)                 \
    X(negative_candidates) X(excluded_itemsets) X(selected_itemsets) X(cohort_rows) X(cohort_events)                \
    X(zero_time_dropped) X(multi_row_patients) X(design_columns) X(train_rows) X(train_events) X(test_rows)         \
    X(test_events)

json counts_json(const StageCounts &c) {
    json j = json::object();
#define X(f) j[#f] = c.f;
    ADR_COUNT_FIELDS(X)
#undef X
    return j;
}

StageCounts counts_from(const json &j) {
    StageCounts c;
#define X(f) j.at(#f).get_to(c.f);
    ADR_COUNT_FIELDS(X)
#undef X
    return c;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string join_codes(const std::vector<std::string> &codes) {
    std::string out;
    for (std::size_t i = 0; i < codes.size(); ++i) out += (i ? "|" : "") + codes[i];
    return out;
}

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path) {
    out.flush();
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

} // namespace

std::string describe(const StageCounts &counts) {
    std::string out;
    auto add = [&](const char *name, std::size_t v) {
        if (v == 0) return;
        out += (out.empty() ? "" : ", ") + std::string(name) + "=" + std::to_string(v);
    };
#define X(f) add(#f, counts.f);
    ADR_COUNT_FIELDS(X)
#undef X
    return out.empty() ? "none" : out;
}

bool SignalReport::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConsistencyCheck &c) { return c.passed; });
}

ReportFormat parse_report_format(const std::string &token) {
    if (token == "json") return ReportFormat::Json;
    if (token == "csv") return ReportFormat::Csv;
    if (token == "markdown" || token == "md") return ReportFormat::Markdown;
    throw std::invalid_argument("unknown report format '" + token + "' (json, csv, markdown)");
}

std::string report_to_json(const SignalReport &r) {
    json j;
    j["exposures"] = r.exposures;

    json un = json::array();
    for (const auto &u : r.unadjusted) {
        un.push_back({{"rank", u.rank},
                      {"name", u.name},
                      {"coefficient", u.coefficient},
                      {"hazard_ratio", u.hazard_ratio},
                      {"hr_lower", u.hr_lower},
                      {"hr_upper", u.hr_upper},
                      {"ph_p_value", optional_json(u.ph_p_value)}});
    }
    j["unadjusted"] = {{"exposures", un}, {"ph_flagged", r.ph_flagged}};

    json alphas = json::array();
    for (const auto &a : r.alphas) {
        alphas.push_back({{"alpha", a.alpha},
                          {"lambda_star", a.lambda_star},
                          {"lambda_min", a.lambda_min},
                          {"lambda_count", a.lambda_count},
                          {"nonzero", a.nonzero},
                          {"exposures", a.exposures},
                          {"warnings", a.warnings}});
    }
    j["penalized"] = alphas;

    json val = json::array();
    for (const auto &v : r.validation) {
        val.push_back({{"model", v.model},
                       {"alpha", optional_json(v.alpha)},
                       {"lambda_star", optional_json(v.lambda_star)},
                       {"concordance", v.concordance},
                       {"auc_summary", v.auc_summary},
                       {"comparable_pairs", v.comparable_pairs}});
    }
    j["validation"] = val;

    json items = json::array();
    for (const auto &s : r.itemsets) {
        items.push_back({{"codes", s.codes},
                         {"direction", s.direction},
                         {"supp_d1", s.supp_d1},
                         {"supp_d2", s.supp_d2},
                         {"bias_lift", s.bias_lift}});
    }
    j["itemsets"] = items;

    json checks = json::array();
    for (const auto &c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;

    const auto &p = r.provenance;
    json cfg = json::object();
    for (const auto &[k, v] : p.config) cfg[k] = v;
    j["provenance"] = {{"config_hash", p.config_hash},
                       {"seed", p.seed},
                       {"split_seed", p.split_seed},
                       {"cv_seed", p.cv_seed},
                       {"synthesis_seed", optional_json(p.synthesis_seed)},
                       {"config", cfg},
                       {"counts", counts_json(p.counts)}};
    return j.dump(2) + "\n";
}

SignalReport report_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw std::runtime_error(std::string("report JSON does not parse: ") + e.what());
    }
    SignalReport r;
    try {
        j.at("exposures").get_to(r.exposures);
        for (const auto &u : j.at("unadjusted").at("exposures")) {
            UnadjustedRow row;
            u.at("rank").get_to(row.rank);
            u.at("name").get_to(row.name);
            u.at("coefficient").get_to(row.coefficient);
            u.at("hazard_ratio").get_to(row.hazard_ratio);
            u.at("hr_lower").get_to(row.hr_lower);
            u.at("hr_upper").get_to(row.hr_upper);
            row.ph_p_value = optional_from<double>(u, "ph_p_value");
            r.unadjusted.push_back(row);
        }
        j.at("unadjusted").at("ph_flagged").get_to(r.ph_flagged);
        for (const auto &a : j.at("penalized")) {
            AlphaBlock b;
            a.at("alpha").get_to(b.alpha);
            a.at("lambda_star").get_to(b.lambda_star);
            a.at("lambda_min").get_to(b.lambda_min);
            a.at("lambda_count").get_to(b.lambda_count);
            a.at("nonzero").get_to(b.nonzero);
            a.at("exposures").get_to(b.exposures);
            a.at("warnings").get_to(b.warnings);
            r.alphas.push_back(b);
        }
        for (const auto &v : j.at("validation")) {
            ValidationRow row;
            v.at("model").get_to(row.model);
            row.alpha = optional_from<double>(v, "alpha");
            row.lambda_star = optional_from<double>(v, "lambda_star");
            v.at("concordance").get_to(row.concordance);
            v.at("auc_summary").get_to(row.auc_summary);
            v.at("comparable_pairs").get_to(row.comparable_pairs);
            r.validation.push_back(row);
        }
        for (const auto &s : j.at("itemsets")) {
            SelectedItemset it;
            s.at("codes").get_to(it.codes);
            s.at("direction").get_to(it.direction);
            s.at("supp_d1").get_to(it.supp_d1);
            s.at("supp_d2").get_to(it.supp_d2);
            s.at("bias_lift").get_to(it.bias_lift);
            r.itemsets.push_back(it);
        }
        for (const auto &c : j.at("checks")) {
            r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("detail").get<std::string>()});
        }
        const auto &p = j.at("provenance");
        p.at("config_hash").get_to(r.provenance.config_hash);
        p.at("seed").get_to(r.provenance.seed);
        p.at("split_seed").get_to(r.provenance.split_seed);
        p.at("cv_seed").get_to(r.provenance.cv_seed);
        r.provenance.synthesis_seed = optional_from<std::uint64_t>(p, "synthesis_seed");
        for (const auto &[k, v] : p.at("config").items()) r.provenance.config.emplace_back(k, v.get<std::string>());
        r.provenance.counts = counts_from(p.at("counts"));
    } catch (const json::exception &e) {
        throw std::runtime_error(std::string("report JSON is missing or mistypes a field: ") + e.what());
    }
    return r;
}

SignalReport load_report(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

std::string report_to_markdown(const SignalReport &r) {
    std::ostringstream md;
    md << "# Signal refinement report\n\n";
    md << "Config hash `" << r.provenance.config_hash << "`, seed " << r.provenance.seed << ".\n\n";

    md << "## Unadjusted Cox model\n\n";
    md << "| Rank | Exposure | Coefficient | HR (95% CI) | PH p-value |\n";
    md << "|---:|---|---:|---|---:|\n";
    for (const auto &u : r.unadjusted) {
        md << "| " << u.rank << " | " << u.name << " | " << fixed(u.coefficient, 3) << " | " << fixed(u.hazard_ratio, 3)
           << " (" << fixed(u.hr_lower, 3) << "-" << fixed(u.hr_upper, 3) << ") | "
           << (u.ph_p_value ? fixed(*u.ph_p_value, 3) : std::string("-")) << " |\n";
    }
    md << "\n" << r.ph_flagged << " covariate(s) flagged by the proportional-hazards check.\n\n";

    if (!r.alphas.empty()) {
        md << "## Penalized models: coefficient (rank)\n\n";
        md << "| Exposure |";
        for (const auto &a : r.alphas) md << " alpha " << fixed(a.alpha, 2) << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < r.alphas.size(); ++i) md << "---:|";
        md << "\n| lambda* |";
        for (const auto &a : r.alphas) md << " " << fixed(a.lambda_star, 5) << " |";
        md << "\n| No. betas |";
        for (const auto &a : r.alphas) md << " " << a.nonzero << " |";
        md << "\n";
        for (const auto &name : r.exposures) {
            md << "| " << name << " |";
            for (const auto &a : r.alphas) {
                auto it = std::find_if(a.exposures.begin(), a.exposures.end(),
                                       [&](const RankedExposure &e) { return e.name == name; });
                if (it == a.exposures.end()) md << " - |";
                else if (it->filtered) md << " 0 (filtered) |";
                else md << " " << fixed(it->coefficient, 3) << " (" << it->rank << ") |";
            }
            md << "\n";
        }
        md << "\n";
    }

    md << "## Validation on the held-out half\n\n";
    md << "| Model | lambda* | Concordance | Summary AUC |\n|---|---:|---:|---:|\n";
    for (const auto &v : r.validation) {
        md << "| " << v.model << " | " << (v.lambda_star ? fixed(*v.lambda_star, 5) : std::string("-")) << " | "
           << fixed(v.concordance, 3) << " | " << fixed(v.auc_summary, 3) << " |\n";
    }

    md << "\n## Stage counts\n\n| Stage | Count |\n|---|---:|\n";
    const auto &c = r.provenance.counts;
#define X(f) md << "| " #f " | " << c.f << " |\n";
    ADR_COUNT_FIELDS(X)
#undef X

    md << "\n## Consistency checks\n\n";
    for (const auto &ch : r.checks) md << "- " << (ch.passed ? "ok" : "FAILED") << " " << ch.name << ": " << ch.detail << "\n";
    md << "\n" << r.itemsets.size() << " confounder itemsets entered the penalized models.\n";
    return md.str();
}

namespace {

void write_csvs(const SignalReport &r, const std::filesystem::path &dir, std::vector<std::filesystem::path> &written) {
    {
        const auto path = dir / "unadjusted_model.csv";
        auto out = open_out(path);
        out.precision(17);
        out << "rank,name,coefficient,hazard_ratio,ci_lower,ci_upper\n";
        for (const auto &u : r.unadjusted) {
            out << u.rank << ',' << u.name << ',' << u.coefficient << ',' << u.hazard_ratio << ',' << u.hr_lower << ','
                << u.hr_upper << '\n';
        }
        finish(out, path);
        written.push_back(path);
    }
    {
        const auto path = dir / "penalized_models.csv";
        auto out = open_out(path);
        out.precision(17);
        out << "alpha,lambda_star,n_betas,exposure,coefficient,rank,status\n";
        for (const auto &a : r.alphas) {
            for (const auto &e : a.exposures) {
                out << a.alpha << ',' << a.lambda_star << ',' << a.nonzero << ',' << e.name << ',' << e.coefficient << ','
                    << e.rank << ',' << (e.filtered ? "filtered" : "ranked") << '\n';
            }
        }
        finish(out, path);
        written.push_back(path);
    }
    {
        const auto path = dir / "validation.csv";
        auto out = open_out(path);
        out.precision(17);
        out << "model,alpha,lambda_star,concordance,auc_summary\n";
        for (const auto &v : r.validation) {
            out << v.model << ',';
            if (v.alpha) out << *v.alpha;
            out << ',';
            if (v.lambda_star) out << *v.lambda_star;
            out << ',' << v.concordance << ',' << v.auc_summary << '\n';
        }
        finish(out, path);
        written.push_back(path);
    }
    {
        const auto path = dir / "selected_itemsets.csv";
        auto out = open_out(path);
        out.precision(17);
        out << "itemset,direction,supp_D1,supp_D2,bias_lift\n";
        for (const auto &s : r.itemsets) {
            out << join_codes(s.codes) << ',' << s.direction << ',' << s.supp_d1 << ',' << s.supp_d2 << ',' << s.bias_lift << '\n';
        }
        finish(out, path);
        written.push_back(path);
    }
}

} // namespace

std::vector<std::filesystem::path> emit_report(const SignalReport &report, const std::set<ReportFormat> &formats,
                                               const std::filesystem::path &dir) {
    if (formats.empty()) throw std::invalid_argument("no report format selected");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    if (formats.count(ReportFormat::Json)) {
        const auto path = dir / "report.json";
        auto out = open_out(path);
        out << report_to_json(report);
        finish(out, path);
        written.push_back(path);
    }
    if (formats.count(ReportFormat::Csv)) write_csvs(report, dir, written);
    if (formats.count(ReportFormat::Markdown)) {
        const auto path = dir / "report.md";
        auto out = open_out(path);
        out << report_to_markdown(report);
        finish(out, path);
        written.push_back(path);
    }
    return written;
}

} // namespace adrrefine
