// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "letterlm/model.hpp"
#include "letterlm/rouge.hpp"
#include "letterlm/tokenizer.hpp"

namespace letterlm {

struct EvalCase {
    std::string case_id;
    std::string prompt;
    std::string reference;
};

struct CaseScores {
    std::string case_id;
    std::string generated;
    std::map<std::string, RougeScore> scores;  // variant -> score
    bool failed = false;
    std::string error;
};

struct VariantSummary {
    double mean_recall = 0.0, sd_recall = 0.0;
    double mean_precision = 0.0, sd_precision = 0.0;
    double mean_f1 = 0.0, sd_f1 = 0.0;
};

struct EvalReport {
    std::vector<CaseScores> cases;
    std::map<std::string, VariantSummary> summary;  // variant -> mean +- sd
};

// Greedy-generates one completion per prompt and scores it against the
// reference for each requested variant ("1", "2", "L"). Generation
// failures score zero for that case and do not abort the run.
EvalReport evaluate_corpus(const ModelWeights& model, const AdapterSet* adapters,
                           const Tokenizer& tk, const std::vector<EvalCase>& cases,
                           const std::vector<std::string>& variants, int max_new);

// Scores pre-generated texts; shared by evaluate_corpus and tests.
EvalReport score_generations(const std::vector<CaseScores>& generated,
                             const std::vector<EvalCase>& cases,
                             const std::vector<std::string>& variants);

std::string scores_csv(const EvalReport& report);
std::string summary_markdown(const EvalReport& report);
std::string summary_json(const EvalReport& report);

}  // namespace letterlm
