// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace letterlm {

struct RougeScore {
    std::string variant;  // "1", "2", "L"
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

// Metric tokenization: lowercase, punctuation stripped, whitespace split.
// No stemming or synonym matching; only byte-equal tokens count.
std::vector<std::string> metric_tokens(const std::string& text);

// N-gram overlap with multiplicity clipped to the reference counts.
// Total over all inputs; both sides empty scores zero.
RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n);

// Longest-common-subsequence variant over the same tokens.
RougeScore rouge_l(const std::string& candidate, const std::string& reference);

double f1_from(double recall, double precision);

}  // namespace letterlm
