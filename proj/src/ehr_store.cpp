/*
 * @file ehr_store.cpp
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
#include "adrrefine/ehr_store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace adrrefine {

std::string_view to_string(Sex sex) noexcept { return sex == Sex::Male ? "M" : "F"; }

std::string_view to_string(EventKind kind) noexcept {
    return kind == EventKind::Drug ? "drug" : "medical";
}

std::optional<Sex> parse_sex(std::string_view token) noexcept {
    if (token == "M") return Sex::Male;
    if (token == "F") return Sex::Female;
    return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view token) noexcept {
    if (token == "drug") return EventKind::Drug;
    if (token == "medical") return EventKind::Medical;
    return std::nullopt;
}

PatientDatabase::PatientDatabase(std::vector<PatientRecord> patients, Date data_end)
    : patients_{std::move(patients)}, data_end_{data_end} {
    std::sort(patients_.begin(), patients_.end(),
              [](const PatientRecord &a, const PatientRecord &b) { return a.patient_id < b.patient_id; });
    for (std::size_t i = 1; i < patients_.size(); ++i) {
        if (patients_[i].patient_id == patients_[i - 1].patient_id) {
            throw std::invalid_argument("duplicate patient_id " + patients_[i].patient_id);
        }
    }
    for (auto &p : patients_) {
        std::sort(p.events.begin(), p.events.end());
    }
}

std::size_t PatientDatabase::event_count() const noexcept {
    std::size_t n = 0;
    for (const auto &p : patients_) n += p.events.size();
    return n;
}

const PatientRecord *PatientDatabase::find(std::string_view patient_id) const noexcept {
    auto it = std::lower_bound(patients_.begin(), patients_.end(), patient_id,
                               [](const PatientRecord &p, std::string_view id) { return p.patient_id < id; });
    if (it == patients_.end() || it->patient_id != patient_id) return nullptr;
    return &*it;
}

std::string describe(const RejectedRow &row) {
    std::ostringstream os;
    os << row.file << ":" << row.line;
    if (!row.field.empty()) os << " field '" << row.field << "'";
    os << ": " << row.reason;
    return os.str();
}

namespace {

std::string summarize(const std::vector<RejectedRow> &rows) {
    std::ostringstream os;
    os << rows.size() << " rejected row(s)";
    const std::size_t shown = std::min<std::size_t>(rows.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) os << "\n  " << describe(rows[i]);
    if (rows.size() > shown) os << "\n  ...";
    return os.str();
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string &line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

constexpr std::string_view kDemographicsHeader =
    "patient_id,practice_id,sex,birth_date,registration_date,exit_date";
constexpr std::string_view kEventsHeader = "patient_id,date,code,kind";

} // namespace

LoadError::LoadError(std::vector<RejectedRow> rows)
    : std::runtime_error(summarize(rows)), rows_{std::move(rows)} {}

LoadResult load_event_log(const std::filesystem::path &demographics_path,
                          const std::filesystem::path &events_path, LoadMode mode,
                          std::optional<Date> data_end) {
    std::vector<RejectedRow> rejected;
    const std::string demo_name = demographics_path.filename().string();
    const std::string events_name = events_path.filename().string();

    std::map<std::string, PatientRecord, std::less<>> patients;
    std::optional<Date> latest;
    auto note_latest = [&](Date d) {
        if (!latest || d > *latest) latest = d;
    };

    {
        auto in = open_input(demographics_path);
        std::string line;
        std::size_t line_no = 1;
        if (!std::getline(in, line)) throw LoadError({{demo_name, 1, "", "missing header"}});
        strip_cr(line);
        if (line != kDemographicsHeader) {
            throw LoadError({{demo_name, 1, "", "unexpected header '" + line + "'"}});
        }
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            auto fields = split_csv(line);
            auto reject = [&](std::string field, std::string reason) {
                rejected.push_back({demo_name, line_no, std::move(field), std::move(reason)});
            };
            if (fields.size() != 6) {
                reject("", "expected 6 fields, found " + std::to_string(fields.size()));
                continue;
            }
            PatientRecord rec;
            rec.patient_id = std::string(fields[0]);
            rec.practice_id = std::string(fields[1]);
            if (rec.patient_id.empty()) {
                reject("patient_id", "empty");
                continue;
            }
            auto sex = parse_sex(fields[2]);
            if (!sex) {
                reject("sex", "unknown sex token '" + std::string(fields[2]) + "'");
                continue;
            }
            rec.sex = *sex;
            auto birth = Date::parse(fields[3]);
            auto reg = Date::parse(fields[4]);
            if (!birth) {
                reject("birth_date", "malformed date '" + std::string(fields[3]) + "'");
                continue;
            }
            if (!reg) {
                reject("registration_date", "malformed date '" + std::string(fields[4]) + "'");
                continue;
            }
            rec.birth_date = *birth;
            rec.registration_date = *reg;
            if (!fields[5].empty()) {
                auto exit = Date::parse(fields[5]);
                if (!exit) {
                    reject("exit_date", "malformed date '" + std::string(fields[5]) + "'");
                    continue;
                }
                rec.exit_date = *exit;
                note_latest(*exit);
            }
            if (rec.registration_date < rec.birth_date) {
                reject("registration_date", "before birth_date");
                continue;
            }
            if (rec.exit_date && *rec.exit_date < rec.registration_date) {
                reject("exit_date", "before registration_date");
                continue;
            }
            if (patients.contains(rec.patient_id)) {
                reject("patient_id", "duplicate patient_id " + rec.patient_id);
                continue;
            }
            patients.emplace(rec.patient_id, std::move(rec));
        }
    }

    struct PendingEvent {
        std::size_t line;
        PatientRecord *patient;
        CodedEvent event;
    };
    std::vector<PendingEvent> pending;
    {
        auto in = open_input(events_path);
        std::string line;
        std::size_t line_no = 1;
        if (!std::getline(in, line)) throw LoadError({{events_name, 1, "", "missing header"}});
        strip_cr(line);
        if (line != kEventsHeader) {
            throw LoadError({{events_name, 1, "", "unexpected header '" + line + "'"}});
        }
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            auto fields = split_csv(line);
            auto reject = [&](std::string field, std::string reason) {
                rejected.push_back({events_name, line_no, std::move(field), std::move(reason)});
            };
            if (fields.size() != 4) {
                reject("", "expected 4 fields, found " + std::to_string(fields.size()));
                continue;
            }
            auto it = patients.find(fields[0]);
            if (it == patients.end()) {
                reject("patient_id", "unknown patient_id '" + std::string(fields[0]) + "'");
                continue;
            }
            auto date = Date::parse(fields[1]);
            if (!date) {
                reject("date", "malformed date '" + std::string(fields[1]) + "'");
                continue;
            }
            if (fields[2].empty()) {
                reject("code", "empty code");
                continue;
            }
            auto kind = parse_event_kind(fields[3]);
            if (!kind) {
                reject("kind", "unknown kind '" + std::string(fields[3]) + "'");
                continue;
            }
            note_latest(*date);
            pending.push_back({line_no, &it->second, {*date, std::string(fields[2]), *kind}});
        }
    }

    const Date end = data_end.value_or(latest.value_or(Date{}));
    for (auto &pe : pending) {
        const PatientRecord &p = *pe.patient;
        if (pe.event.date < p.registration_date || pe.event.date > p.observation_end(end)) {
            rejected.push_back({events_name, pe.line, "date",
                                "event date " + pe.event.date.to_string() +
                                    " outside registration window of patient " + p.patient_id});
            continue;
        }
        pe.patient->events.push_back(std::move(pe.event));
    }

    if (mode == LoadMode::Strict && !rejected.empty()) {
        throw LoadError(std::move(rejected));
    }

    LoadResult result;
    std::vector<PatientRecord> records;
    records.reserve(patients.size());
    for (auto &[id, rec] : patients) {
        std::sort(rec.events.begin(), rec.events.end());
        const auto before = rec.events.size();
        rec.events.erase(std::unique(rec.events.begin(), rec.events.end()), rec.events.end());
        result.duplicate_events += before - rec.events.size();
        records.push_back(std::move(rec));
    }
    result.database = PatientDatabase(std::move(records), end);
    result.rejected = std::move(rejected);
    return result;
}

void write_event_log(const PatientDatabase &db, const std::filesystem::path &demographics_path,
                     const std::filesystem::path &events_path) {
    std::ofstream demo(demographics_path);
    if (!demo) throw std::runtime_error("cannot write " + demographics_path.string());
    std::ofstream events(events_path);
    if (!events) throw std::runtime_error("cannot write " + events_path.string());
    demo << kDemographicsHeader << '\n';
    events << kEventsHeader << '\n';
    for (const auto &p : db.patients()) {
        demo << p.patient_id << ',' << p.practice_id << ',' << to_string(p.sex) << ','
             << p.birth_date.to_string() << ',' << p.registration_date.to_string() << ','
             << (p.exit_date ? p.exit_date->to_string() : std::string{}) << '\n';
        for (const auto &e : p.events) {
            events << p.patient_id << ',' << e.date.to_string() << ',' << e.code << ','
                   << to_string(e.kind) << '\n';
        }
    }
    if (!demo || !events) throw std::runtime_error("I/O error writing event log");
}

std::string_view to_string(ViolationType type) noexcept {
    switch (type) {
    case ViolationType::RegistrationBeforeBirth: return "registration_before_birth";
    case ViolationType::ExitBeforeRegistration: return "exit_before_registration";
    case ViolationType::EventsUnsorted: return "events_unsorted";
    case ViolationType::EventOutsideObservation: return "event_outside_observation";
    case ViolationType::EventAfterDataEnd: return "event_after_data_end";
    case ViolationType::EmptyCode: return "empty_code";
    }
    return "unknown";
}

ValidationReport validate_database(const PatientDatabase &db) {
    ValidationReport report;
    for (const auto &p : db.patients()) {
        auto add = [&](ViolationType t, std::string detail) {
            report.violations.push_back({t, p.patient_id, std::move(detail)});
        };
        if (p.registration_date < p.birth_date) {
            add(ViolationType::RegistrationBeforeBirth, p.registration_date.to_string());
        }
        if (p.exit_date && *p.exit_date < p.registration_date) {
            add(ViolationType::ExitBeforeRegistration, p.exit_date->to_string());
        }
        if (!std::is_sorted(p.events.begin(), p.events.end(),
                            [](const CodedEvent &a, const CodedEvent &b) { return a.date < b.date; })) {
            add(ViolationType::EventsUnsorted, "");
        }
        const Date end = p.observation_end(db.data_end());
        for (const auto &e : p.events) {
            if (e.code.empty()) add(ViolationType::EmptyCode, e.date.to_string());
            if (e.date > db.data_end()) {
                add(ViolationType::EventAfterDataEnd, e.code + "@" + e.date.to_string());
            } else if (e.date < p.registration_date || e.date > end) {
                add(ViolationType::EventOutsideObservation, e.code + "@" + e.date.to_string());
            }
        }
    }
    return report;
}

ValidationReport validate_database(const PatientDatabase &db,
                                   std::span<const std::string> outcome_codes,
                                   std::span<const std::string> exposure_codes) {
    ValidationReport report = validate_database(db);
    const std::set<std::string, std::less<>> outcomes(outcome_codes.begin(), outcome_codes.end());
    const std::set<std::string, std::less<>> exposures(exposure_codes.begin(), exposure_codes.end());
    for (const auto &p : db.patients()) {
        for (std::size_t i = 0; i < p.events.size(); ++i) {
            if (!outcomes.contains(p.events[i].code)) continue;
            for (const auto &e : p.events) {
                if (e.date == p.events[i].date && exposures.contains(e.code)) {
                    report.same_day_collisions.push_back(
                        {p.patient_id, e.date, p.events[i].code, e.code});
                }
            }
        }
    }
    return report;
}

std::vector<std::string> history_basket(const PatientRecord &patient, Date index_date) {
    if (index_date < patient.registration_date) {
        throw std::invalid_argument("index date " + index_date.to_string() +
                                    " precedes registration of patient " + patient.patient_id);
    }
    std::vector<std::string> basket;
    for (const auto &e : patient.events) {
        if (e.date < index_date) basket.push_back(e.code);
    }
    std::sort(basket.begin(), basket.end());
    basket.erase(std::unique(basket.begin(), basket.end()), basket.end());
    return basket;
}

} // namespace adrrefine
