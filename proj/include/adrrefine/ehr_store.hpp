/*
 * @file ehr_store.hpp
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

#include "adrrefine/date.hpp"

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrrefine {

enum class Sex { Male, Female };
enum class EventKind { Drug, Medical };

std::string_view to_string(Sex sex) noexcept;
std::string_view to_string(EventKind kind) noexcept;
std::optional<Sex> parse_sex(std::string_view token) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view token) noexcept;

struct CodedEvent {
    Date date;
    std::string code;
    EventKind kind = EventKind::Medical;

    auto operator<=>(const CodedEvent &) const = default;
};

struct PatientRecord {
    std::string patient_id;
    std::string practice_id;
    Sex sex = Sex::Female;
    Date birth_date;
    Date registration_date;
    std::optional<Date> exit_date;
    std::vector<CodedEvent> events; ///< sorted by (date, code, kind)

    /// Last date the patient is observed: exit date if present, else the data end.
    Date observation_end(Date data_end) const noexcept {
        return exit_date ? std::min(*exit_date, data_end) : data_end;
    }

    bool operator==(const PatientRecord &) const = default;
};

/// Immutable patient store. Patients are kept sorted by patient_id.
class PatientDatabase {
public:
    PatientDatabase() = default;

    /// Sorts patients and their events. Throws std::invalid_argument on a
    /// duplicate patient_id; other record invariants are checked by
    /// validate_database.
    PatientDatabase(std::vector<PatientRecord> patients, Date data_end);

    const std::vector<PatientRecord> &patients() const noexcept { return patients_; }
    std::size_t size() const noexcept { return patients_.size(); }
    Date data_end() const noexcept { return data_end_; }
    std::size_t event_count() const noexcept;

    /// Binary search by id; nullptr when absent.
    const PatientRecord *find(std::string_view patient_id) const noexcept;

    bool operator==(const PatientDatabase &) const = default;

private:
    std::vector<PatientRecord> patients_;
    Date data_end_;
};

enum class LoadMode { Strict, Lenient };

struct RejectedRow {
    std::string file;
    std::size_t line = 0;
    std::string field;
    std::string reason;
};

std::string describe(const RejectedRow &row);

class LoadError : public std::runtime_error {
public:
    explicit LoadError(std::vector<RejectedRow> rows);
    const std::vector<RejectedRow> &rows() const noexcept { return rows_; }

private:
    std::vector<RejectedRow> rows_;
};

struct LoadResult {
    PatientDatabase database;
    std::vector<RejectedRow> rejected; ///< only populated in lenient mode
    std::size_t duplicate_events = 0;
};

/// Reads the demographics and events CSV pair. When `data_end` is not given
/// it defaults to the latest event or exit date in the files.
LoadResult load_event_log(const std::filesystem::path &demographics_path,
                          const std::filesystem::path &events_path,
                          LoadMode mode = LoadMode::Strict,
                          std::optional<Date> data_end = std::nullopt);

void write_event_log(const PatientDatabase &db, const std::filesystem::path &demographics_path,
                     const std::filesystem::path &events_path);

enum class ViolationType {
    RegistrationBeforeBirth,
    ExitBeforeRegistration,
    EventsUnsorted,
    EventOutsideObservation,
    EventAfterDataEnd,
    EmptyCode,
};

std::string_view to_string(ViolationType type) noexcept;

struct Violation {
    ViolationType type;
    std::string patient_id;
    std::string detail;
};

/// Outcome and exposure recorded on the same day for one patient. The
/// ordering of such pairs is unknown, so they are surfaced rather than resolved.
struct SameDayCollision {
    std::string patient_id;
    Date date;
    std::string outcome_code;
    std::string exposure_code;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<SameDayCollision> same_day_collisions;

    bool empty() const noexcept { return violations.empty(); }
};

ValidationReport validate_database(const PatientDatabase &db);

/// Same as above, additionally flagging same-day outcome/exposure records.
ValidationReport validate_database(const PatientDatabase &db,
                                   std::span<const std::string> outcome_codes,
                                   std::span<const std::string> exposure_codes);

/// Distinct codes recorded strictly before `index_date`, sorted.
/// Throws std::invalid_argument if `index_date` precedes registration.
std::vector<std::string> history_basket(const PatientRecord &patient, Date index_date);

} // namespace adrrefine
