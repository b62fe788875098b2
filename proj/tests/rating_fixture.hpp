// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "letterlm/ratings.hpp"

namespace letterlm::testfx {

// Hand-constructed 10-case rating study. Case 2 was rated by four
// raters, every other case by five, for 49 sheets total. Constructed so
// the case-averaged dimension means are exactly 2.96, 2.84, 3.29, 3.44,
// cases 3 and 10 average 3.7, and case 9 is the unique lowest at 2.5.
inline std::vector<RatingSheet> paper_rating_fixture() {
    struct CaseRow {
        int case_id;
        int raters;
        std::array<std::array<int, 5>, 4> scores;  // [dimension][rater]
    };
    // Per-dimension rater scores; columns beyond `raters` are unused.
    const std::array<std::array<int, 5>, 4> mid = {{{3, 3, 3, 3, 3},
                                                    {2, 3, 3, 3, 3},
                                                    {4, 4, 3, 3, 3},
                                                    {4, 4, 3, 3, 3}}};
    const std::array<std::array<int, 5>, 4> high = {{{4, 4, 4, 3, 3},
                                                     {4, 4, 4, 3, 3},
                                                     {4, 4, 4, 4, 3},
                                                     {4, 4, 4, 4, 3}}};
    const std::vector<CaseRow> rows = {
        {1, 5, mid},
        {2, 4, {{{2, 2, 2, 2, 0}, {2, 2, 2, 2, 0}, {3, 3, 2, 2, 0}, {4, 4, 4, 4, 0}}}},
        {3, 5, high},
        {4, 5, mid},
        {5, 5, mid},
        {6, 5, mid},
        {7, 5, mid},
        {8, 5, {{{3, 3, 3, 3, 3}, {2, 3, 3, 3, 3}, {4, 3, 3, 3, 3}, {4, 3, 3, 3, 3}}}},
        {9, 5, {{{4, 2, 2, 2, 2}, {4, 2, 2, 2, 2}, {4, 3, 2, 2, 2}, {4, 3, 2, 2, 2}}}},
        {10, 5, high},
    };

    std::vector<RatingSheet> sheets;
    for (const CaseRow& row : rows) {
        for (int rater = 0; rater < row.raters; ++rater) {
            RatingSheet sheet;
            sheet.case_id = row.case_id;
            sheet.rater_id = rater + 1;
            for (std::size_t d = 0; d < kRatingDimensions.size(); ++d) {
                sheet.scores[kRatingDimensions[d]] =
                    row.scores[d][static_cast<std::size_t>(rater)];
            }
            sheets.push_back(std::move(sheet));
        }
    }
    return sheets;
}

}  // namespace letterlm::testfx
