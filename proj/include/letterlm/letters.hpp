// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "letterlm/tokenizer.hpp"

namespace letterlm {

// Calendar date in dd.mm.yyyy form, validated against the civil calendar.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    bool operator==(const Date&) const = default;
};

bool date_valid(const Date& d);
long days_from_civil(const Date& d);
long days_between(const Date& a, const Date& b);  // b - a in days
Date shift_date(const Date& d, long days);
std::string date_to_string(const Date& d);                  // dd.mm.yyyy
std::optional<Date> parse_exact_date(const std::string&);   // dd.mm.yyyy only

// History timestamps come in three forms: a day (dd.mm.yyyy), a month
// (mm/yyyy, anchored at day 1), or a day range (dd.mm.yyyy-dd.mm.yyyy).
struct HistoryDate {
    enum class Precision { kDay, kMonth } precision = Precision::kDay;
    Date start;                // day-1 anchor for month precision
    std::optional<Date> end;   // present for ranges

    std::string to_string() const;
};

std::optional<HistoryDate> parse_history_date(const std::string& text);

struct HistoryEntry {
    std::optional<HistoryDate> when;
    std::string text;
};

struct PatientInfo {
    bool present = false;
    std::string name;
    std::optional<Date> birth_date;
    std::string id;
};

enum class TreatmentIntent { kRecommended, kPlanned };

std::string intent_keyword(TreatmentIntent intent);  // "Recommended treatment" / ...

struct LetterRecord {
    std::optional<Date> document_date;
    std::string author;
    std::vector<std::string> recipients;
    PatientInfo patient;
    std::vector<std::string> diagnoses;
    std::vector<std::string> secondary_diagnoses;
    std::vector<HistoryEntry> history;  // non-decreasing by start date
    TreatmentIntent treatment_intent = TreatmentIntent::kRecommended;
    std::string treatment;
    std::string body;
};

struct LetterParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses the labeled head (Date, Author, Recipient, Patient, Diagnoses,
// Secondary diagnoses, Tumor-specific anamnesis, treatment line) and the
// body that follows the first blank line after the treatment line.
// Missing mandatory sections and malformed dates are rejected; lines that
// carry no label or date attach verbatim to the nearest text field.
LetterRecord parse_letter(const std::string& raw);

// Canonical text form: serializing and re-parsing is the identity.
std::string record_to_text(const LetterRecord& record);

enum class AnonymizePolicy {
    kSummary,  // strip patient name / birth date / id entirely
    kDisplay,  // mask names and ids with *****, keep shifted dates
};

// Shifts every date in head and body by exactly shift_days (pairwise
// intervals are preserved), and removes or masks patient identifiers.
// Total: never fails.
LetterRecord anonymize(const LetterRecord& record, AnonymizePolicy policy,
                       long shift_days);

enum class Task { kSummary, kLetter };

struct TrainingExample {
    std::string prompt;
    std::string completion;
    long token_count = -1;  // set by truncate_to_budget
};

// Deterministic serialization: head sections in fixed order, one blank
// line between sections, the intent keyword rendered verbatim, prompt
// terminated by a "Letter:" marker line. The completion is the body,
// unchanged. Summary task omits the patient identifier line.
TrainingExample format_example(const LetterRecord& record, Task task);

// Drops completion sentences from the end until <s> prompt completion
// </s> fits max_tokens; the prompt is never cut. Rejects budgets the
// prompt alone (or plus no whole sentence) cannot meet.
TrainingExample truncate_to_budget(const TrainingExample& example, const Tokenizer& tk,
                                   int max_tokens);

long count_example_tokens(const TrainingExample& example, const Tokenizer& tk);

// Sentence end offsets used by truncation (after . ! ? followed by
// whitespace, and after newlines).
std::vector<std::size_t> sentence_end_offsets(const std::string& text);

}  // namespace letterlm
