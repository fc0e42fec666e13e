/*
 * @file synthetic.cpp
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
#include "adrrefine/synthetic.hpp"

#include "adrrefine/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace adrrefine {

namespace {

constexpr double kDaysPerYear = 365.25;

double annual_to_daily_hazard(double annual_probability) {
    return -std::log1p(-annual_probability) / kDaysPerYear;
}

double apply_odds(double probability, double odds_multiplier) {
    const double odds = probability / (1.0 - probability) * odds_multiplier;
    return odds / (1.0 + odds);
}

void require(bool ok, const std::string &message) {
    if (!ok) throw std::invalid_argument("infeasible synthetic spec: " + message);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

/// Date `years` after `d`; 29 February maps to 1 March in common years.
Date anniversary(Date d, int years) {
    const int y = d.year() + years;
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (d.month() == 2 && d.day() == 29 && !leap) return Date::from_ymd(y, 3, 1);
    return Date::from_ymd(y, d.month(), d.day());
}

class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            total += 1.0 / std::pow(static_cast<double>(k + 1), exponent);
            cdf_[k] = total;
        }
        for (auto &c : cdf_) c /= total;
    }

    std::size_t operator()(Rng &rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

} // namespace

std::string vocabulary_code(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "V%04zu", index);
    return buf;
}

void validate_spec(const SyntheticSpec &spec) {
    require(spec.n_patients > 0, "n_patients must be positive");
    require(spec.n_practices > 0, "n_practices must be positive");
    require(spec.calendar_start < spec.calendar_end, "calendar_start must precede calendar_end");
    require(in_unit(spec.baseline_outcome_hazard) && spec.baseline_outcome_hazard < 1.0,
            "baseline_outcome_hazard must lie in [0,1)");
    require(in_unit(spec.exit_rate) && spec.exit_rate < 1.0, "exit_rate must lie in [0,1)");
    require(spec.background_codes_per_year >= 0.0, "background_codes_per_year must be >= 0");
    require(spec.repeat_prescriptions_mean >= 0.0, "repeat_prescriptions_mean must be >= 0");
    require(spec.min_registration_age >= 0 && spec.min_registration_age <= spec.max_registration_age,
            "registration age range is empty");
    require(spec.registration_spread_years >= 0, "registration_spread_years must be >= 0");
    require(spec.calendar_start + static_cast<std::int32_t>(spec.registration_spread_years * kDaysPerYear) <
                spec.calendar_end,
            "registration spread reaches past calendar_end");
    require(!spec.outcome_code.empty(), "outcome_code must be non-empty");

    std::set<std::string> named{spec.outcome_code};
    for (const auto &e : spec.exposures) {
        require(!e.code.empty(), "exposure code must be non-empty");
        require(named.insert(e.code).second, "duplicate exposure/outcome code " + e.code);
        require(in_unit(e.prescribing_rate) && e.prescribing_rate < 1.0,
                "prescribing_rate of " + e.code + " must lie in [0,1)");
        require(e.adr_hazard_multiplier > 0.0, "adr_hazard_multiplier of " + e.code + " must be > 0");
    }
    std::size_t demanded = 0;
    for (const auto &rf : spec.risk_factors) {
        require(in_unit(rf.prevalence), "prevalence of risk factor " + rf.name + " must lie in [0,1]");
        require(in_unit(rf.code_record_probability),
                "code_record_probability of risk factor " + rf.name + " must lie in [0,1]");
        require(rf.outcome_hazard_multiplier > 0.0,
                "outcome_hazard_multiplier of risk factor " + rf.name + " must be > 0");
        require(rf.n_codes > 0, "risk factor " + rf.name + " needs at least one code");
        for (const auto &[code, mult] : rf.prescribing_odds) {
            require(mult > 0.0, "prescribing odds multiplier for " + code + " must be > 0");
            require(std::any_of(spec.exposures.begin(), spec.exposures.end(),
                                [&](const ExposureDefinition &e) { return e.code == code; }),
                    "risk factor " + rf.name + " links unknown exposure " + code);
        }
        demanded += rf.n_codes;
    }
    require(spec.item_vocabulary_size >= demanded,
            "item_vocabulary_size (" + std::to_string(spec.item_vocabulary_size) +
                ") is smaller than the " + std::to_string(demanded) + " risk-factor codes demanded");
    for (std::size_t i = 0; i < spec.item_vocabulary_size; ++i) {
        require(!named.contains(vocabulary_code(i)),
                "exposure/outcome code collides with vocabulary code " + vocabulary_code(i));
    }
}

std::vector<std::vector<std::string>> risk_factor_codes(const SyntheticSpec &spec) {
    Rng rng(derive_seed(spec.seed, "risk-factor-codes"));
    std::vector<std::size_t> pool(spec.item_vocabulary_size);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    rng.shuffle(pool);
    std::vector<std::vector<std::string>> out;
    std::size_t next = 0;
    for (const auto &rf : spec.risk_factors) {
        std::vector<std::string> codes;
        for (std::size_t k = 0; k < rf.n_codes; ++k) codes.push_back(vocabulary_code(pool[next++]));
        std::sort(codes.begin(), codes.end());
        out.push_back(std::move(codes));
    }
    return out;
}

PatientDatabase generate_synthetic(const SyntheticSpec &spec) {
    validate_spec(spec);
    const auto factor_codes = risk_factor_codes(spec);
    const ZipfSampler background(spec.item_vocabulary_size, spec.vocabulary_zipf_exponent);
    const double h0 = annual_to_daily_hazard(spec.baseline_outcome_hazard);
    const double exit_hazard = annual_to_daily_hazard(spec.exit_rate);
    const std::uint64_t patient_seed = derive_seed(spec.seed, "patients");
    const int id_width = static_cast<int>(std::to_string(spec.n_patients).size());

    std::vector<PatientRecord> patients;
    patients.reserve(spec.n_patients);
    for (std::size_t i = 0; i < spec.n_patients; ++i) {
        Rng rng(patient_seed ^ mix64(i + 1));
        PatientRecord p;
        char buf[32];
        std::snprintf(buf, sizeof buf, "P%0*zu", id_width, i + 1);
        p.patient_id = buf;
        std::snprintf(buf, sizeof buf, "PR%03zu", rng.uniform_index(spec.n_practices) + 1);
        p.practice_id = buf;
        p.sex = rng.bernoulli(0.5) ? Sex::Male : Sex::Female;

        const int spread_days = static_cast<int>(spec.registration_spread_years * kDaysPerYear);
        p.registration_date = spec.calendar_start + static_cast<std::int32_t>(rng.uniform_index(spread_days + 1));
        const double reg_age = rng.uniform(spec.min_registration_age, spec.max_registration_age + 1.0);
        p.birth_date = p.registration_date - static_cast<std::int32_t>(reg_age * kDaysPerYear);
        const auto exit_offset = rng.exponential(exit_hazard);
        if (exit_offset < static_cast<double>(spec.calendar_end - p.registration_date)) {
            p.exit_date = p.registration_date + static_cast<std::int32_t>(exit_offset);
        }
        const Date obs_end = p.observation_end(spec.calendar_end);
        const std::int32_t obs_days = obs_end - p.registration_date;

        auto record = [&](Date d, const std::string &code, EventKind kind) {
            if (d >= p.registration_date && d <= obs_end) p.events.push_back({d, code, kind});
        };

        double outcome_multiplier = 1.0;
        std::vector<double> odds(spec.exposures.size(), 1.0);
        for (std::size_t r = 0; r < spec.risk_factors.size(); ++r) {
            const auto &rf = spec.risk_factors[r];
            if (!rng.bernoulli(rf.prevalence)) continue;
            outcome_multiplier *= rf.outcome_hazard_multiplier;
            for (std::size_t e = 0; e < spec.exposures.size(); ++e) {
                if (auto it = rf.prescribing_odds.find(spec.exposures[e].code); it != rf.prescribing_odds.end()) {
                    odds[e] *= it->second;
                }
            }
            // footprint recorded within the first year after registration
            const Date onset = p.registration_date + static_cast<std::int32_t>(rng.uniform_index(301));
            for (const auto &code : factor_codes[r]) {
                const auto offset = static_cast<std::int32_t>(rng.uniform_index(61));
                if (rng.bernoulli(rf.code_record_probability)) record(onset + offset, code, EventKind::Medical);
            }
        }

        // hazard change points: first prescriptions of exposures with an ADR effect
        std::vector<std::pair<Date, double>> adr_starts;
        for (std::size_t e = 0; e < spec.exposures.size(); ++e) {
            const auto &ex = spec.exposures[e];
            const double rate = annual_to_daily_hazard(apply_odds(ex.prescribing_rate, odds[e]));
            const double first = rate > 0.0 ? rng.exponential(rate) : INFINITY;
            if (!(first <= obs_days)) continue;
            const Date start = p.registration_date + static_cast<std::int32_t>(first);
            record(start, ex.code, EventKind::Drug);
            const auto repeats = rng.poisson(spec.repeat_prescriptions_mean);
            for (std::uint64_t k = 0; k < repeats; ++k) {
                record(start + static_cast<std::int32_t>(rng.uniform_index(366)), ex.code, EventKind::Drug);
            }
            if (ex.adr_hazard_multiplier != 1.0) adr_starts.emplace_back(start, ex.adr_hazard_multiplier);
        }

        const auto n_background = rng.poisson(spec.background_codes_per_year * obs_days / kDaysPerYear);
        for (std::uint64_t k = 0; k < n_background; ++k) {
            const std::size_t v = background(rng);
            const Date d = p.registration_date + static_cast<std::int32_t>(rng.uniform_index(obs_days + 1));
            record(d, vocabulary_code(v), v % 2 == 0 ? EventKind::Drug : EventKind::Medical);
        }

        // Recurrent outcome process with piecewise-constant hazard; pieces break at
        // birthdays (age effect) and at ADR prescription starts.
        std::sort(adr_starts.begin(), adr_starts.end());
        double threshold = rng.exponential(1.0);
        double accumulated = 0.0;
        Date t = p.registration_date;
        while (t <= obs_end) {
            const int age = age_in_years(p.birth_date, t);
            const Date next_birthday = anniversary(p.birth_date, age + 1);
            Date piece_end = std::min(next_birthday, obs_end + 1);
            double hazard = h0 * outcome_multiplier *
                            std::exp(spec.outcome_log_hazard_per_decade * (age - 50) / 10.0);
            for (const auto &[start, mult] : adr_starts) {
                if (start <= t) hazard *= mult;
                else piece_end = std::min(piece_end, start);
            }
            const double length = static_cast<double>(piece_end - t);
            if (hazard > 0.0 && accumulated + hazard * length >= threshold) {
                const auto offset = static_cast<std::int32_t>((threshold - accumulated) / hazard);
                const Date when = t + offset;
                record(when, spec.outcome_code, EventKind::Medical);
                accumulated = 0.0;
                threshold = rng.exponential(1.0);
                t = when + 1;
                continue;
            }
            accumulated += hazard * length;
            t = piece_end;
        }

        std::sort(p.events.begin(), p.events.end());
        p.events.erase(std::unique(p.events.begin(), p.events.end()), p.events.end());
        patients.push_back(std::move(p));
    }
    return PatientDatabase(std::move(patients), spec.calendar_end);
}

SyntheticSpec parse_synthetic_spec(const KeyValueConfig &cfg, bool strict) {
    SyntheticSpec s;
    s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(s.seed)));
    s.n_practices = static_cast<std::size_t>(cfg.get_int("n_practices", static_cast<std::int64_t>(s.n_practices)));
    s.n_patients = static_cast<std::size_t>(cfg.get_int("n_patients", static_cast<std::int64_t>(s.n_patients)));
    s.item_vocabulary_size = static_cast<std::size_t>(
        cfg.get_int("item_vocabulary_size", static_cast<std::int64_t>(s.item_vocabulary_size)));
    s.outcome_code = cfg.get_string("outcome_code", s.outcome_code);
    s.baseline_outcome_hazard = cfg.get_double("baseline_outcome_hazard", s.baseline_outcome_hazard);
    s.calendar_start = cfg.get_date("calendar_start", s.calendar_start);
    s.calendar_end = cfg.get_date("calendar_end", s.calendar_end);
    s.background_codes_per_year = cfg.get_double("background_codes_per_year", s.background_codes_per_year);
    s.vocabulary_zipf_exponent = cfg.get_double("vocabulary_zipf_exponent", s.vocabulary_zipf_exponent);
    s.outcome_log_hazard_per_decade =
        cfg.get_double("outcome_log_hazard_per_decade", s.outcome_log_hazard_per_decade);
    s.exit_rate = cfg.get_double("exit_rate", s.exit_rate);
    s.min_registration_age = static_cast<int>(cfg.get_int("min_registration_age", s.min_registration_age));
    s.max_registration_age = static_cast<int>(cfg.get_int("max_registration_age", s.max_registration_age));
    s.registration_spread_years =
        static_cast<int>(cfg.get_int("registration_spread_years", s.registration_spread_years));
    s.repeat_prescriptions_mean = cfg.get_double("repeat_prescriptions_mean", s.repeat_prescriptions_mean);

    for (const auto &id : cfg.subkeys("exposure")) {
        const std::string k = "exposure." + id + ".";
        ExposureDefinition e;
        e.code = cfg.require_string(k + "code");
        e.prescribing_rate = cfg.get_double(k + "prescribing_rate", e.prescribing_rate);
        e.adr_hazard_multiplier = cfg.get_double(k + "adr_hazard_multiplier", e.adr_hazard_multiplier);
        s.exposures.push_back(std::move(e));
    }
    for (const auto &id : cfg.subkeys("risk_factor")) {
        const std::string k = "risk_factor." + id + ".";
        LatentRiskFactor rf;
        rf.name = id;
        rf.n_codes = static_cast<std::size_t>(cfg.get_int(k + "n_codes", static_cast<std::int64_t>(rf.n_codes)));
        rf.prevalence = cfg.get_double(k + "prevalence", rf.prevalence);
        rf.outcome_hazard_multiplier = cfg.get_double(k + "outcome_hazard_multiplier", rf.outcome_hazard_multiplier);
        rf.code_record_probability = cfg.get_double(k + "code_record_probability", rf.code_record_probability);
        for (const auto &item : cfg.get_list(k + "prescribing_odds", {})) {
            const auto colon = item.rfind(':');
            if (colon == std::string::npos) {
                throw ConfigError(cfg.source() + ": " + k + "prescribing_odds entry '" + item +
                                  "' is not code:multiplier");
            }
            try {
                rf.prescribing_odds[item.substr(0, colon)] = std::stod(item.substr(colon + 1));
            } catch (const std::logic_error &) {
                throw ConfigError(cfg.source() + ": " + k + "prescribing_odds entry '" + item +
                                  "' has a bad multiplier");
            }
        }
        s.risk_factors.push_back(std::move(rf));
    }
    if (strict) cfg.reject_unknown_keys();
    return s;
}

} // namespace adrrefine
