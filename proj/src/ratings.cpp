// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace letterlm {

namespace {

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mu = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

const CaseStats& RatingsSummary::lowest_case() const {
    if (cases.empty()) throw std::logic_error("RatingsSummary: no cases");
    return *std::min_element(cases.begin(), cases.end(),
                             [](const CaseStats& a, const CaseStats& b) {
                                 return a.mean < b.mean;
                             });
}

RatingsSummary aggregate_ratings(const std::vector<RatingSheet>& sheets) {
    if (sheets.empty()) {
        throw std::invalid_argument("aggregate_ratings: no sheets");
    }
    std::set<std::pair<int, int>> seen;
    for (const RatingSheet& sheet : sheets) {
        if (!seen.insert({sheet.case_id, sheet.rater_id}).second) {
            throw std::invalid_argument("aggregate_ratings: duplicate (case " +
                                        std::to_string(sheet.case_id) + ", rater " +
                                        std::to_string(sheet.rater_id) + ") pair");
        }
        for (const char* dim : kRatingDimensions) {
            auto it = sheet.scores.find(dim);
            if (it == sheet.scores.end()) {
                throw std::invalid_argument("aggregate_ratings: sheet (case " +
                                            std::to_string(sheet.case_id) + ", rater " +
                                            std::to_string(sheet.rater_id) +
                                            ") missing dimension '" + dim + "'");
            }
            if (it->second < 1 || it->second > 4) {
                throw std::invalid_argument("aggregate_ratings: score " +
                                            std::to_string(it->second) +
                                            " outside 1..4 for dimension '" + dim + "'");
            }
        }
    }

    std::map<int, std::vector<const RatingSheet*>> by_case;
    for (const RatingSheet& sheet : sheets) by_case[sheet.case_id].push_back(&sheet);

    RatingsSummary summary;
    for (const char* dim : kRatingDimensions) {
        std::vector<double> pooled;
        std::vector<double> case_means;
        for (const auto& [case_id, case_sheets] : by_case) {
            std::vector<double> in_case;
            for (const RatingSheet* sheet : case_sheets) {
                in_case.push_back(static_cast<double>(sheet->scores.at(dim)));
            }
            case_means.push_back(mean_of(in_case));
            pooled.insert(pooled.end(), in_case.begin(), in_case.end());
        }
        DimensionStats stats;
        stats.mean_pooled = mean_of(pooled);
        stats.sd_pooled = sample_sd(pooled);
        stats.mean_by_case = mean_of(case_means);
        summary.dimensions[dim] = stats;
    }

    for (const auto& [case_id, case_sheets] : by_case) {
        std::vector<double> values;
        for (const RatingSheet* sheet : case_sheets) {
            for (const char* dim : kRatingDimensions) {
                values.push_back(static_cast<double>(sheet->scores.at(dim)));
            }
        }
        CaseStats cs;
        cs.case_id = case_id;
        cs.mean = mean_of(values);
        cs.sd = sample_sd(values);
        cs.sheet_count = static_cast<int>(case_sheets.size());
        summary.cases.push_back(cs);
    }
    return summary;
}

std::vector<RatingSheet> parse_ratings_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw std::invalid_argument("ratings csv: empty input");
    }
    auto split = [](const std::string& row) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream fs(row);
        while (std::getline(fs, field, ',')) fields.push_back(field);
        return fields;
    };
    const std::vector<std::string> header = split(line);
    const std::vector<std::string> expected = {"case_id",           "rater_id",
                                               "correctness",       "comprehensiveness",
                                               "style",             "practicality"};
    if (header != expected) {
        throw std::invalid_argument(
            "ratings csv: header must be case_id,rater_id,correctness,"
            "comprehensiveness,style,practicality");
    }
    std::vector<RatingSheet> sheets;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> fields = split(line);
        if (fields.size() != 6) {
            throw std::invalid_argument("ratings csv: expected 6 fields at line " +
                                        std::to_string(line_no));
        }
        try {
            RatingSheet sheet;
            sheet.case_id = std::stoi(fields[0]);
            sheet.rater_id = std::stoi(fields[1]);
            for (std::size_t d = 0; d < kRatingDimensions.size(); ++d) {
                sheet.scores[kRatingDimensions[d]] = std::stoi(fields[2 + d]);
            }
            sheets.push_back(std::move(sheet));
        } catch (const std::exception&) {
            throw std::invalid_argument("ratings csv: bad number at line " +
                                        std::to_string(line_no));
        }
    }
    return sheets;
}

}  // namespace letterlm
