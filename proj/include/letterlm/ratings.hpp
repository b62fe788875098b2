// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace letterlm {

inline constexpr std::array<const char*, 4> kRatingDimensions = {
    "correctness", "comprehensiveness", "style", "practicality"};

// One rater's 4-dimension scores for one case, each in 1..4.
struct RatingSheet {
    int case_id = 0;
    int rater_id = 0;
    std::map<std::string, int> scores;
};

struct DimensionStats {
    double mean_by_case = 0.0;  // mean over cases of per-case rater means
    double mean_pooled = 0.0;   // mean over all sheets
    double sd_pooled = 0.0;     // sample sd over all sheets
};

struct CaseStats {
    int case_id = 0;
    double mean = 0.0;  // over the case's sheets and all four dimensions
    double sd = 0.0;
    int sheet_count = 0;
};

struct RatingsSummary {
    std::map<std::string, DimensionStats> dimensions;
    std::vector<CaseStats> cases;  // ordered by case id

    const CaseStats& lowest_case() const;
};

// Validates dimensions and score ranges, rejects duplicate (case, rater)
// pairs, and aggregates. Dimension means are reported both pooled over
// all sheets and averaged case-by-case; the two agree on balanced
// designs and differ when raters skip cases.
RatingsSummary aggregate_ratings(const std::vector<RatingSheet>& sheets);

// CSV with columns case_id,rater_id,correctness,comprehensiveness,style,
// practicality; a header row is required.
std::vector<RatingSheet> parse_ratings_csv(const std::string& text);

}  // namespace letterlm
