// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/letters.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstring>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace letterlm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    lines.push_back(current);
    return lines;
}

bool two_digits(const std::string& s, std::size_t at, int& out) {
    if (at + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[at])) ||
        !std::isdigit(static_cast<unsigned char>(s[at + 1]))) {
        return false;
    }
    out = (s[at] - '0') * 10 + (s[at + 1] - '0');
    return true;
}

bool four_digits(const std::string& s, std::size_t at, int& out) {
    out = 0;
    for (std::size_t i = at; i < at + 4; ++i) {
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        out = out * 10 + (s[i] - '0');
    }
    return true;
}

std::string pad2(int v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace

bool date_valid(const Date& d) {
    return std::chrono::year_month_day(std::chrono::year(d.year),
                                       std::chrono::month(static_cast<unsigned>(d.month)),
                                       std::chrono::day(static_cast<unsigned>(d.day)))
        .ok();
}

long days_from_civil(const Date& d) {
    const std::chrono::year_month_day ymd(std::chrono::year(d.year),
                                          std::chrono::month(static_cast<unsigned>(d.month)),
                                          std::chrono::day(static_cast<unsigned>(d.day)));
    return std::chrono::sys_days(ymd).time_since_epoch().count();
}

long days_between(const Date& a, const Date& b) {
    return days_from_civil(b) - days_from_civil(a);
}

Date shift_date(const Date& d, long days) {
    const auto shifted = std::chrono::sys_days(std::chrono::year_month_day(
                             std::chrono::year(d.year),
                             std::chrono::month(static_cast<unsigned>(d.month)),
                             std::chrono::day(static_cast<unsigned>(d.day)))) +
                         std::chrono::days(days);
    const std::chrono::year_month_day ymd(shifted);
    return Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

std::string date_to_string(const Date& d) {
    return pad2(d.day) + "." + pad2(d.month) + "." + std::to_string(d.year);
}

std::optional<Date> parse_exact_date(const std::string& s) {
    if (s.size() != 10 || s[2] != '.' || s[5] != '.') return std::nullopt;
    Date d;
    int y;
    if (!two_digits(s, 0, d.day) || !two_digits(s, 3, d.month) || !four_digits(s, 6, y)) {
        return std::nullopt;
    }
    d.year = y;
    if (!date_valid(d)) return std::nullopt;
    return d;
}

std::string HistoryDate::to_string() const {
    if (precision == Precision::kMonth) {
        return pad2(start.month) + "/" + std::to_string(start.year);
    }
    std::string s = date_to_string(start);
    if (end) s += "-" + date_to_string(*end);
    return s;
}

std::optional<HistoryDate> parse_history_date(const std::string& raw) {
    const std::string text = trim(raw);
    if (auto d = parse_exact_date(text)) {
        return HistoryDate{HistoryDate::Precision::kDay, *d, std::nullopt};
    }
    // mm/yyyy, anchored at the first of the month
    if (text.size() == 7 && text[2] == '/') {
        int m, y;
        if (two_digits(text, 0, m) && four_digits(text, 3, y)) {
            Date anchor{y, m, 1};
            if (date_valid(anchor)) {
                return HistoryDate{HistoryDate::Precision::kMonth, anchor, std::nullopt};
            }
        }
        return std::nullopt;
    }
    // dd.mm.yyyy-dd.mm.yyyy with '-' or an en dash, optionally spaced
    for (const std::string& dash : {std::string("-"), std::string("\xE2\x80\x93")}) {
        const std::size_t pos = text.find(dash, 1);
        if (pos == std::string::npos) continue;
        auto a = parse_exact_date(trim(text.substr(0, pos)));
        auto b = parse_exact_date(trim(text.substr(pos + dash.size())));
        if (a && b) {
            return HistoryDate{HistoryDate::Precision::kDay, *a, b};
        }
    }
    return std::nullopt;
}

std::string intent_keyword(TreatmentIntent intent) {
    return intent == TreatmentIntent::kRecommended ? "Recommended treatment"
                                                   : "Planned treatment";
}

namespace {

// Does this token look like an attempted date? Used to distinguish a
// malformed date (an error with a line number) from ordinary prose that
// happens to precede a colon.
bool looks_like_date(const std::string& s) {
    if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    return s.find('.') != std::string::npos || s.find('/') != std::string::npos;
}

struct LabelMatch {
    std::string label;
    std::string rest;
};

std::optional<LabelMatch> match_label(const std::string& line) {
    static const char* kLabels[] = {
        "Date",       "Author",      "Recipient",           "Patient",
        "Diagnoses",  "Secondary diagnoses", "Tumor-specific anamnesis",
        "Recommended treatment", "Planned treatment", "Recommendation", "Planned",
    };
    for (const char* label : kLabels) {
        const std::size_t n = std::strlen(label);
        if (line.compare(0, n, label) == 0 && line.size() > n && line[n] == ':') {
            return LabelMatch{label, trim(line.substr(n + 1))};
        }
    }
    return std::nullopt;
}

}  // namespace

LetterRecord parse_letter(const std::string& raw) {
    const std::vector<std::string> lines = split_lines(raw);
    LetterRecord rec;

    enum class Section { kNone, kDiagnoses, kSecondary, kAnamnesis };
    Section section = Section::kNone;
    bool saw_diagnoses = false, saw_secondary = false, saw_anamnesis = false,
         saw_treatment = false;
    std::size_t body_start = lines.size();

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        const std::size_t line_no = i + 1;
        if (line.empty()) continue;

        if (auto m = match_label(line)) {
            if (m->label == "Date") {
                auto d = parse_exact_date(m->rest);
                if (!d) {
                    throw LetterParseError("malformed date '" + m->rest + "' at line " +
                                           std::to_string(line_no));
                }
                rec.document_date = *d;
            } else if (m->label == "Author") {
                rec.author = m->rest;
            } else if (m->label == "Recipient") {
                rec.recipients.push_back(m->rest);
            } else if (m->label == "Patient") {
                rec.patient.present = true;
                std::string rest = m->rest;
                const std::size_t born = rest.find(", born ");
                const std::size_t idpos = rest.find(", ID ");
                if (idpos != std::string::npos) {
                    rec.patient.id = trim(rest.substr(idpos + 5));
                }
                if (born != std::string::npos) {
                    const std::size_t date_end =
                        idpos != std::string::npos && idpos > born ? idpos : rest.size();
                    const std::string date_str =
                        trim(rest.substr(born + 7, date_end - born - 7));
                    auto d = parse_exact_date(date_str);
                    if (!d) {
                        throw LetterParseError("malformed date '" + date_str +
                                               "' at line " + std::to_string(line_no));
                    }
                    rec.patient.birth_date = *d;
                }
                const std::size_t name_end = std::min(born, idpos);
                rec.patient.name = trim(rest.substr(0, name_end));
            } else if (m->label == "Diagnoses") {
                section = Section::kDiagnoses;
                saw_diagnoses = true;
            } else if (m->label == "Secondary diagnoses") {
                section = Section::kSecondary;
                saw_secondary = true;
            } else if (m->label == "Tumor-specific anamnesis") {
                section = Section::kAnamnesis;
                saw_anamnesis = true;
            } else {  // one of the treatment labels
                rec.treatment_intent =
                    (m->label == "Planned treatment" || m->label == "Planned")
                        ? TreatmentIntent::kPlanned
                        : TreatmentIntent::kRecommended;
                rec.treatment = m->rest;
                saw_treatment = true;
                // Body: everything after the first blank line from here.
                std::size_t j = i + 1;
                while (j < lines.size() && !trim(lines[j]).empty()) {
                    rec.treatment += "\n" + trim(lines[j]);  // wrapped treatment text
                    ++j;
                }
                while (j < lines.size() && trim(lines[j]).empty()) ++j;
                body_start = j;
                break;
            }
            continue;
        }

        switch (section) {
            case Section::kDiagnoses:
                rec.diagnoses.push_back(line);
                break;
            case Section::kSecondary:
                rec.secondary_diagnoses.push_back(line);
                break;
            case Section::kAnamnesis: {
                const std::size_t colon = line.find(": ");
                std::optional<HistoryDate> when;
                std::string text = line;
                if (colon != std::string::npos) {
                    const std::string head = line.substr(0, colon);
                    when = parse_history_date(head);
                    if (!when && looks_like_date(head)) {
                        throw LetterParseError("malformed date '" + head + "' at line " +
                                               std::to_string(line_no));
                    }
                    if (when) text = line.substr(colon + 2);
                }
                if (!when && !rec.history.empty()) {
                    rec.history.back().text += "\n" + text;  // continuation, kept verbatim
                } else {
                    rec.history.push_back({when, text});
                }
                break;
            }
            case Section::kNone:
                // Wrapped recipient addresses: keep the line, verbatim.
                if (!rec.recipients.empty()) {
                    rec.recipients.back() += "\n" + line;
                    break;
                }
                throw LetterParseError("unlabeled line outside any section at line " +
                                       std::to_string(line_no));
        }
    }

    if (!saw_diagnoses) throw LetterParseError("missing section: Diagnoses");
    if (!saw_secondary) throw LetterParseError("missing section: Secondary diagnoses");
    if (!saw_anamnesis) throw LetterParseError("missing section: Tumor-specific anamnesis");
    if (!saw_treatment) {
        throw LetterParseError("missing section: Recommended/Planned treatment");
    }

    std::string body;
    for (std::size_t i = body_start; i < lines.size(); ++i) {
        body += lines[i];
        if (i + 1 < lines.size()) body += '\n';
    }
    rec.body = trim(body);
    if (rec.body.empty()) throw LetterParseError("missing section: letter body");

    // History must be non-decreasing by start date; undated entries (only
    // possible at the front) keep their position.
    std::stable_sort(rec.history.begin(), rec.history.end(),
                     [](const HistoryEntry& a, const HistoryEntry& b) {
                         if (!a.when || !b.when) return false;
                         return days_from_civil(a.when->start) < days_from_civil(b.when->start);
                     });
    return rec;
}

std::string record_to_text(const LetterRecord& rec) {
    std::ostringstream os;
    if (rec.document_date) os << "Date: " << date_to_string(*rec.document_date) << '\n';
    if (!rec.author.empty()) os << "Author: " << rec.author << '\n';
    os << '\n';
    for (const std::string& r : rec.recipients) os << "Recipient: " << r << '\n';
    if (!rec.recipients.empty()) os << '\n';
    if (rec.patient.present) {
        os << "Patient: " << rec.patient.name;
        if (rec.patient.birth_date) os << ", born " << date_to_string(*rec.patient.birth_date);
        if (!rec.patient.id.empty()) os << ", ID " << rec.patient.id;
        os << "\n\n";
    }
    os << "Diagnoses:\n";
    for (const std::string& d : rec.diagnoses) os << d << '\n';
    os << "\nSecondary diagnoses:\n";
    for (const std::string& d : rec.secondary_diagnoses) os << d << '\n';
    os << "\nTumor-specific anamnesis:\n";
    for (const HistoryEntry& h : rec.history) {
        if (h.when) {
            os << h.when->to_string() << ": " << h.text << '\n';
        } else {
            os << h.text << '\n';
        }
    }
    os << '\n' << intent_keyword(rec.treatment_intent) << ": " << rec.treatment << '\n';
    os << '\n' << trim(rec.body) << '\n';
    return os.str();
}

namespace {

std::string mask_word(const std::string& text, const std::string& word) {
    if (word.size() < 2) return text;
    std::string out;
    std::size_t from = 0;
    while (true) {
        const std::size_t at = text.find(word, from);
        if (at == std::string::npos) {
            out += text.substr(from);
            return out;
        }
        const bool left_ok = at == 0 || !std::isalnum(static_cast<unsigned char>(text[at - 1]));
        const std::size_t end = at + word.size();
        const bool right_ok =
            end == text.size() || !std::isalnum(static_cast<unsigned char>(text[end]));
        out += text.substr(from, at - from);
        out += (left_ok && right_ok) ? "*****" : word;
        from = end;
    }
}

// Shift every dd.mm.yyyy and mm/yyyy occurrence; invalid-looking matches
// are left untouched (the operation is total).
std::string shift_dates_in_text(const std::string& text, long shift_days) {
    static const std::regex day_re(R"((\d{2})\.(\d{2})\.(\d{4}))");
    static const std::regex month_re(R"((\d{2})/(\d{4}))");

    auto replace_all = [](const std::string& input, const std::regex& re,
                          auto&& make_replacement) {
        std::string out;
        auto begin = std::sregex_iterator(input.begin(), input.end(), re);
        auto end = std::sregex_iterator();
        std::size_t last = 0;
        for (auto it = begin; it != end; ++it) {
            const std::smatch& m = *it;
            out += input.substr(last, static_cast<std::size_t>(m.position()) - last);
            out += make_replacement(m);
            last = static_cast<std::size_t>(m.position() + m.length());
        }
        out += input.substr(last);
        return out;
    };

    std::string pass1 = replace_all(text, day_re, [&](const std::smatch& m) -> std::string {
        Date d{std::stoi(m[3]), std::stoi(m[2]), std::stoi(m[1])};
        if (!date_valid(d)) return m.str();
        return date_to_string(shift_date(d, shift_days));
    });
    return replace_all(pass1, month_re, [&](const std::smatch& m) -> std::string {
        Date anchor{std::stoi(m[2]), std::stoi(m[1]), 1};
        if (!date_valid(anchor)) return m.str();
        const Date shifted = shift_date(anchor, shift_days);
        return pad2(shifted.month) + "/" + std::to_string(shifted.year);
    });
}

std::vector<std::string> name_parts(const std::string& name) {
    std::vector<std::string> parts;
    std::istringstream is(name);
    std::string w;
    while (is >> w) {
        if (w.size() >= 2) parts.push_back(w);
    }
    if (!name.empty()) parts.push_back(name);
    return parts;
}

}  // namespace

LetterRecord anonymize(const LetterRecord& record, AnonymizePolicy policy,
                       long shift_days) {
    LetterRecord out = record;
    const std::vector<std::string> masks = name_parts(record.patient.name);
    const std::string original_id = record.patient.id;
    const std::string original_birth =
        record.patient.birth_date ? date_to_string(*record.patient.birth_date) : "";

    auto scrub = [&](std::string text) {
        if (policy == AnonymizePolicy::kSummary && !original_birth.empty()) {
            text = mask_word(text, original_birth);
        }
        text = shift_dates_in_text(text, shift_days);
        for (const std::string& part : masks) text = mask_word(text, part);
        if (!original_id.empty()) text = mask_word(text, original_id);
        return text;
    };

    if (out.document_date) out.document_date = shift_date(*out.document_date, shift_days);
    out.author = scrub(out.author);
    for (std::string& r : out.recipients) r = scrub(r);
    for (std::string& d : out.diagnoses) d = scrub(d);
    for (std::string& d : out.secondary_diagnoses) d = scrub(d);
    for (HistoryEntry& h : out.history) {
        if (h.when) {
            h.when->start = shift_date(h.when->start, shift_days);
            if (h.when->end) h.when->end = shift_date(*h.when->end, shift_days);
        }
        h.text = scrub(h.text);
    }
    out.treatment = scrub(out.treatment);
    out.body = scrub(out.body);

    if (policy == AnonymizePolicy::kSummary) {
        out.patient = PatientInfo{};  // stripped entirely
    } else {
        if (!out.patient.name.empty()) out.patient.name = "*****";
        if (!out.patient.id.empty()) out.patient.id = "*****";
        if (out.patient.birth_date) {
            out.patient.birth_date = shift_date(*out.patient.birth_date, shift_days);
        }
    }
    return out;
}

TrainingExample format_example(const LetterRecord& record, Task task) {
    if (trim(record.body).empty()) {
        throw std::invalid_argument("format_example: letter body is empty");
    }
    LetterRecord view = record;
    if (task == Task::kSummary) view.patient = PatientInfo{};

    const std::string text = record_to_text(view);
    // record_to_text ends with "\n<body>\n"; split the head back off so the
    // prompt is exactly the serialized head plus the marker line.
    const std::string body = trim(view.body);
    const std::size_t at = text.rfind("\n" + body + "\n");
    TrainingExample ex;
    ex.prompt = text.substr(0, at + 1) + "Letter:\n";
    ex.completion = body;
    return ex;
}

std::vector<std::size_t> sentence_end_offsets(const std::string& text) {
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            offsets.push_back(i + 1);
        } else if (c == '.' || c == '!' || c == '?') {
            if (i + 1 == text.size() ||
                std::isspace(static_cast<unsigned char>(text[i + 1]))) {
                offsets.push_back(i + 1);
            }
        }
    }
    return offsets;
}

long count_example_tokens(const TrainingExample& example, const Tokenizer& tk) {
    return static_cast<long>(encode(tk, example.prompt).size()) +
           static_cast<long>(encode(tk, example.completion).size()) + 2;  // <s>, </s>
}

TrainingExample truncate_to_budget(const TrainingExample& example, const Tokenizer& tk,
                                   int max_tokens) {
    TrainingExample out = example;
    out.token_count = count_example_tokens(out, tk);
    if (out.token_count <= max_tokens) return out;

    const long prompt_tokens = static_cast<long>(encode(tk, out.prompt).size()) + 2;
    if (prompt_tokens >= max_tokens) {
        throw std::invalid_argument("truncate_to_budget: prompt alone uses " +
                                    std::to_string(prompt_tokens) + " of " +
                                    std::to_string(max_tokens) + " tokens");
    }

    const std::vector<std::size_t> cuts = sentence_end_offsets(out.completion);
    std::string best;
    long best_count = -1;
    for (std::size_t cut : cuts) {
        std::string prefix = trim(out.completion.substr(0, cut));
        TrainingExample candidate{out.prompt, prefix, -1};
        const long count = count_example_tokens(candidate, tk);
        if (count <= max_tokens) {
            best = prefix;
            best_count = count;
        } else {
            break;  // offsets grow monotonically
        }
    }
    if (best_count < 0) {
        throw std::invalid_argument(
            "truncate_to_budget: no whole sentence fits the budget of " +
            std::to_string(max_tokens) + " tokens");
    }
    out.completion = best;
    out.token_count = best_count;
    return out;
}

}  // namespace letterlm
