/*
 * @file study_design.cpp
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
#include "adrrefine/study_design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace adrrefine {

void validate_criteria(const StudyCriteria &c) {
    auto fail = [](const std::string &what) { throw std::invalid_argument("invalid study criteria: " + what); };
    if (c.outcome_codes.empty()) fail("outcome_codes is empty");
    if (c.exposure_codes.empty()) fail("exposure_codes is empty");
    if (std::set<std::string>(c.exposure_codes.begin(), c.exposure_codes.end()).size() != c.exposure_codes.size()) {
        fail("exposure_codes contains duplicates");
    }
    if (c.case_min_age > c.case_max_age) fail("case_min_age > case_max_age");
    if (c.cohort_min_age > c.cohort_max_age) fail("cohort_min_age > cohort_max_age");
    if (c.min_history_days < 0) fail("min_history is negative");
    if (c.cohort_start > c.cohort_end) fail("cohort window start is after its end");
    if (c.followup_days <= 0) fail("followup must be positive");
    if (c.controls_per_case < 1) fail("controls_per_case must be at least 1");
    if (c.age_match_tolerance < 0) fail("age_match_tolerance is negative");
}

std::size_t CaseControlSet::control_count() const noexcept {
    std::size_t n = 0;
    for (const auto &c : controls) n += c.size();
    return n;
}

namespace {

/// First outcome and first investigated exposure per patient.
struct PatientMarks {
    std::optional<Date> first_outcome;
    std::optional<Date> first_exposure;
};

PatientMarks marks_for(const PatientRecord &p, const std::set<std::string> &outcomes,
                       const std::set<std::string> &exposures) {
    PatientMarks m;
    for (const auto &e : p.events) {
        if (outcomes.count(e.code) && (!m.first_outcome || e.date < *m.first_outcome)) m.first_outcome = e.date;
        if (e.kind == EventKind::Drug && exposures.count(e.code) &&
            (!m.first_exposure || e.date < *m.first_exposure)) {
            m.first_exposure = e.date;
        }
    }
    return m;
}

std::vector<PatientMarks> all_marks(const PatientDatabase &db, const StudyCriteria &c) {
    const std::set<std::string> outcomes(c.outcome_codes.begin(), c.outcome_codes.end());
    const std::set<std::string> exposures(c.exposure_codes.begin(), c.exposure_codes.end());
    std::vector<PatientMarks> out;
    out.reserve(db.size());
    for (const auto &p : db.patients()) out.push_back(marks_for(p, outcomes, exposures));
    return out;
}

bool exposed_before(const PatientMarks &m, Date index) { return m.first_exposure && *m.first_exposure < index; }

} // namespace

std::vector<IndexedPatient> select_cases(const PatientDatabase &db, const StudyCriteria &c) {
    validate_criteria(c);
    const auto marks = all_marks(db, c);
    std::vector<IndexedPatient> cases;
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto &p = db.patients()[i];
        if (!marks[i].first_outcome) continue;
        const Date index = *marks[i].first_outcome;
        const int age = age_in_years(p.birth_date, index);
        if (age < c.case_min_age || age > c.case_max_age) continue;
        if (index - p.registration_date < c.min_history_days) continue;
        if (exposed_before(marks[i], index)) continue;
        cases.push_back({p.patient_id, index});
    }
    std::sort(cases.begin(), cases.end(), [](const IndexedPatient &a, const IndexedPatient &b) {
        return std::tie(a.index_date, a.patient_id) < std::tie(b.index_date, b.patient_id);
    });
    return cases;
}

CaseControlSet match_controls(const PatientDatabase &db, const std::vector<IndexedPatient> &cases,
                              const StudyCriteria &c) {
    validate_criteria(c);
    const auto marks = all_marks(db, c);

    // never-outcome patients grouped by (practice, sex), sorted by birth date
    std::map<std::pair<std::string, Sex>, std::vector<std::size_t>> pools;
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (marks[i].first_outcome) continue;
        const auto &p = db.patients()[i];
        pools[{p.practice_id, p.sex}].push_back(i);
    }
    for (auto &[key, pool] : pools) {
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            return db.patients()[a].birth_date < db.patients()[b].birth_date;
        });
    }

    std::vector<IndexedPatient> ordered = cases;
    std::sort(ordered.begin(), ordered.end(), [](const IndexedPatient &a, const IndexedPatient &b) {
        return std::tie(a.index_date, a.patient_id) < std::tie(b.index_date, b.patient_id);
    });

    std::vector<char> used(db.size(), 0);
    CaseControlSet out;
    // a birth-date window safely wider than the age tolerance narrows the scan
    const int window_days = (c.age_match_tolerance + 1) * 366 + 1;
    for (const auto &cs : ordered) {
        const PatientRecord *case_rec = db.find(cs.patient_id);
        if (!case_rec) throw std::invalid_argument("case '" + cs.patient_id + "' is not in the database");
        const Date index = cs.index_date;
        const int case_age = age_in_years(case_rec->birth_date, index);

        auto pool_it = pools.find({case_rec->practice_id, case_rec->sex});
        std::vector<std::size_t> eligible;
        if (pool_it != pools.end()) {
            const auto &pool = pool_it->second;
            auto lo = std::lower_bound(pool.begin(), pool.end(), case_rec->birth_date - window_days,
                                       [&](std::size_t i, Date d) { return db.patients()[i].birth_date < d; });
            for (auto it = lo; it != pool.end(); ++it) {
                const auto &p = db.patients()[*it];
                if (p.birth_date > case_rec->birth_date + window_days) break;
                if (used[*it] || p.registration_date > index) continue;
                const int age = age_in_years(p.birth_date, index);
                if (std::abs(age - case_age) > c.age_match_tolerance) continue;
                if (age < c.case_min_age || age > c.case_max_age) continue;
                if (index - p.registration_date < c.min_history_days) continue;
                if (index > p.observation_end(db.data_end())) continue;
                if (exposed_before(marks[*it], index)) continue;
                eligible.push_back(*it);
            }
        }
        if (eligible.empty()) {
            ++out.dropped_cases;
            continue;
        }
        auto distance = [&](std::size_t i) { return std::abs(db.patients()[i].registration_date - case_rec->registration_date); };
        std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
            const int da = distance(a);
            const int db_ = distance(b);
            if (da != db_) return da < db_;
            return db.patients()[a].patient_id < db.patients()[b].patient_id;
        });
        eligible.resize(std::min(eligible.size(), c.controls_per_case));
        std::vector<IndexedPatient> chosen;
        for (auto i : eligible) {
            used[i] = 1;
            chosen.push_back({db.patients()[i].patient_id, index});
        }
        out.cases.push_back(cs);
        out.controls.push_back(std::move(chosen));
    }
    return out;
}

std::pair<TransactionDatabase, TransactionDatabase> build_transaction_dbs(const PatientDatabase &db,
                                                                          const CaseControlSet &ccs) {
    if (ccs.cases.empty()) throw std::invalid_argument("case-control set is empty");
    auto basket = [&](const IndexedPatient &ip) {
        const PatientRecord *p = db.find(ip.patient_id);
        if (!p) throw std::invalid_argument("patient '" + ip.patient_id + "' is not in the database");
        return history_basket(*p, ip.index_date);
    };
    std::vector<std::vector<std::string>> d1;
    std::vector<std::vector<std::string>> d2;
    for (std::size_t k = 0; k < ccs.cases.size(); ++k) {
        d1.push_back(basket(ccs.cases[k]));
        for (const auto &ctrl : ccs.controls[k]) d2.push_back(basket(ctrl));
    }
    return TransactionDatabase::from_codes_shared(d1, d2);
}

CohortResult build_cohort(const PatientDatabase &db, const StudyCriteria &c) {
    validate_criteria(c);
    const std::set<std::string> outcomes(c.outcome_codes.begin(), c.outcome_codes.end());
    std::unordered_map<std::string, std::size_t> exposure_index;
    for (std::size_t k = 0; k < c.exposure_codes.size(); ++k) exposure_index[c.exposure_codes[k]] = k;
    const std::size_t n_exp = c.exposure_codes.size();

    CohortResult out;
    std::vector<std::vector<CohortRow>> per_exposure(n_exp);
    std::map<std::string, std::size_t> rows_per_patient;
    for (const auto &p : db.patients()) {
        std::vector<std::optional<Date>> first(n_exp);
        for (const auto &e : p.events) {
            if (e.kind != EventKind::Drug) continue;
            auto it = exposure_index.find(e.code);
            if (it != exposure_index.end() && (!first[it->second] || e.date < *first[it->second])) first[it->second] = e.date;
        }
        for (std::size_t k = 0; k < n_exp; ++k) {
            if (!first[k]) continue;
            const Date index = *first[k];
            if (index < c.cohort_start || index > c.cohort_end) continue;
            const int age = age_in_years(p.birth_date, index);
            if (age < c.cohort_min_age || age > c.cohort_max_age) continue;
            if (index - p.registration_date <= c.min_history_days) continue;

            const Date end = std::min(p.observation_end(db.data_end()), index + c.followup_days);
            std::optional<Date> outcome;
            for (const auto &e : p.events) {
                if (e.date > index && e.date <= end && outcomes.count(e.code)) {
                    outcome = e.date;
                    break;
                }
            }
            CohortRow row;
            row.patient_id = p.patient_id;
            row.exposure_code = c.exposure_codes[k];
            row.index_date = index;
            row.age_at_index = age;
            row.sex = p.sex;
            row.event = outcome.has_value();
            row.survival_time = (outcome ? *outcome : end) - index;
            if (row.survival_time <= 0) {
                ++out.zero_time_dropped;
                continue;
            }
            row.exposure_history.resize(n_exp, 0);
            for (std::size_t m = 0; m < n_exp; ++m) row.exposure_history[m] = first[m] && *first[m] <= index;
            ++rows_per_patient[p.patient_id];
            per_exposure[k].push_back(std::move(row));
        }
    }
    for (auto &rows : per_exposure) {
        for (auto &r : rows) out.rows.push_back(std::move(r));
    }
    for (const auto &[id, n] : rows_per_patient) out.multi_row_patients += n > 1;
    return out;
}

std::string itemset_column_name(const std::vector<std::string> &codes) {
    std::string name = "itemset:";
    for (std::size_t k = 0; k < codes.size(); ++k) name += (k ? "|" : "") + codes[k];
    return name;
}

DesignMatrix assemble_design_matrix(const PatientDatabase &db, std::vector<CohortRow> &rows,
                                    const std::vector<std::vector<std::string>> &itemsets,
                                    const StudyCriteria &c, const DesignOptions &options) {
    std::vector<std::vector<std::string>> canonical;
    std::set<std::vector<std::string>> seen;
    for (auto s : itemsets) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty()) throw std::invalid_argument("empty itemset given as covariate");
        if (!seen.insert(s).second) throw std::invalid_argument("duplicate itemset " + itemset_column_name(s));
        canonical.push_back(std::move(s));
    }

    const std::size_t n = rows.size();
    const std::size_t n_exp = c.exposure_codes.size();
    std::vector<SparseColumn> cols(2 + n_exp + canonical.size());
    std::vector<std::string> names{"age", "sex_male"};
    for (const auto &e : c.exposure_codes) names.push_back(e);
    for (const auto &s : canonical) names.push_back(itemset_column_name(s));

    double age_mean = 0.0;
    double age_sd = 1.0;
    if (options.standardize_age && n > 0) {
        double sum = 0.0;
        double sq = 0.0;
        for (const auto &r : rows) {
            sum += r.age_at_index;
            sq += static_cast<double>(r.age_at_index) * r.age_at_index;
        }
        age_mean = sum / static_cast<double>(n);
        const double var = sq / static_cast<double>(n) - age_mean * age_mean;
        age_sd = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    DesignMatrix dm;
    std::vector<double> time;
    std::vector<int> event;
    for (std::size_t i = 0; i < n; ++i) {
        auto &r = rows[i];
        if (r.exposure_history.size() != n_exp) throw std::invalid_argument("cohort row exposure bits do not match criteria");
        const auto row = static_cast<std::uint32_t>(i);
        const double age = (r.age_at_index - age_mean) / age_sd;
        if (age != 0.0) {
            cols[0].rows.push_back(row);
            cols[0].values.push_back(age);
        }
        if (r.sex == Sex::Male) {
            cols[1].rows.push_back(row);
            cols[1].values.push_back(1.0);
        }
        for (std::size_t k = 0; k < n_exp; ++k) {
            if (r.exposure_history[k]) {
                cols[2 + k].rows.push_back(row);
                cols[2 + k].values.push_back(1.0);
            }
        }
        const PatientRecord *p = db.find(r.patient_id);
        if (!p) throw std::invalid_argument("cohort patient '" + r.patient_id + "' is not in the database");
        const auto basket = history_basket(*p, r.index_date);
        r.confounder_flags.assign(canonical.size(), 0);
        for (std::size_t s = 0; s < canonical.size(); ++s) {
            if (std::includes(basket.begin(), basket.end(), canonical[s].begin(), canonical[s].end())) {
                r.confounder_flags[s] = 1;
                cols[2 + n_exp + s].rows.push_back(row);
                cols[2 + n_exp + s].values.push_back(1.0);
            }
        }
        time.push_back(r.survival_time);
        event.push_back(r.event ? 1 : 0);
        dm.patient_ids.push_back(r.patient_id);
    }
    for (std::size_t k = 0; k < n_exp; ++k) dm.exposure_columns.push_back(2 + k);
    for (std::size_t s = 0; s < canonical.size(); ++s) dm.itemset_columns.push_back(2 + n_exp + s);
    dm.data = SurvivalData(n, std::move(cols), std::move(names), std::move(time), std::move(event));
    return dm;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

void write_case_control_csv(const std::filesystem::path &path, const CaseControlSet &ccs) {
    auto out = open_for_write(path);
    out << "case_id,index_date,control_id\n";
    for (std::size_t k = 0; k < ccs.cases.size(); ++k) {
        for (const auto &ctrl : ccs.controls[k]) {
            out << ccs.cases[k].patient_id << ',' << ccs.cases[k].index_date.to_string() << ',' << ctrl.patient_id << '\n';
        }
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

void write_cohort_csv(const std::filesystem::path &path, const std::vector<CohortRow> &rows, const StudyCriteria &c) {
    auto out = open_for_write(path);
    out << "patient_id,exposure_code,index_date,age_at_index,sex,survival_time,event";
    for (const auto &e : c.exposure_codes) out << ",history_" << e;
    out << '\n';
    for (const auto &r : rows) {
        out << r.patient_id << ',' << r.exposure_code << ',' << r.index_date.to_string() << ',' << r.age_at_index << ','
            << to_string(r.sex) << ',' << r.survival_time << ',' << (r.event ? 1 : 0);
        for (auto b : r.exposure_history) out << ',' << int{b};
        out << '\n';
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

void write_design_matrix_csv(const std::filesystem::path &path, const DesignMatrix &dm) {
    auto out = open_for_write(path);
    const auto &d = dm.data;
    out << "patient_id,time,event";
    for (const auto &name : d.names()) out << ',' << name;
    out << '\n';
    out.precision(10);
    std::vector<std::size_t> cursor(d.p(), 0);
    for (std::size_t i = 0; i < d.n(); ++i) {
        out << dm.patient_ids[i] << ',' << d.time()[i] << ',' << d.event()[i];
        for (std::size_t j = 0; j < d.p(); ++j) {
            const auto &col = d.column(j);
            double v = 0.0;
            if (cursor[j] < col.nnz() && col.rows[cursor[j]] == i) v = col.values[cursor[j]++];
            out << ',' << v;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

} // namespace adrrefine
