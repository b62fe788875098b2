// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/rouge.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace letterlm {

std::vector<std::string> metric_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            current += static_cast<char>(std::tolower(u));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

double f1_from(double recall, double precision) {
    const double denom = recall + precision;
    return denom > 0.0 ? 2.0 * recall * precision / denom : 0.0;
}

namespace {

std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& tokens,
                                                      int n) {
    std::map<std::vector<std::string>, long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                          tokens.begin() + static_cast<long>(i) + n)];
    }
    return counts;
}

}  // namespace

RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n) {
    if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
    const auto cand = ngram_counts(metric_tokens(candidate), n);
    const auto ref = ngram_counts(metric_tokens(reference), n);

    long cand_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [gram, count] : cand) cand_total += count;
    for (const auto& [gram, count] : ref) ref_total += count;
    for (const auto& [gram, count] : ref) {
        auto it = cand.find(gram);
        if (it != cand.end()) overlap += std::min(count, it->second);  // clipped
    }

    RougeScore score;
    score.variant = std::to_string(n);
    score.recall = ref_total > 0 ? static_cast<double>(overlap) / ref_total : 0.0;
    score.precision = cand_total > 0 ? static_cast<double>(overlap) / cand_total : 0.0;
    score.f1 = f1_from(score.recall, score.precision);
    return score;
}

RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    const std::vector<std::string> cand = metric_tokens(candidate);
    const std::vector<std::string> ref = metric_tokens(reference);

    RougeScore score;
    score.variant = "L";
    if (cand.empty() || ref.empty()) return score;

    // O(|cand| * |ref|) LCS with a rolling row.
    std::vector<long> prev(ref.size() + 1, 0), row(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            row[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1
                                               : std::max(prev[j], row[j - 1]);
        }
        std::swap(prev, row);
    }
    const long lcs = prev[ref.size()];
    score.recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
    score.precision = static_cast<double>(lcs) / static_cast<double>(cand.size());
    score.f1 = f1_from(score.recall, score.precision);
    return score;
}

}  // namespace letterlm
