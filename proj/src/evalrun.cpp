// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/evalrun.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace letterlm {

namespace {

RougeScore score_variant(const std::string& candidate, const std::string& reference,
                         const std::string& variant) {
    if (variant == "L") return rouge_l(candidate, reference);
    return rouge_n(candidate, reference, std::stoi(variant));
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

EvalReport score_generations(const std::vector<CaseScores>& generated,
                             const std::vector<EvalCase>& cases,
                             const std::vector<std::string>& variants) {
    if (generated.size() != cases.size()) {
        throw std::invalid_argument("score_generations: case count mismatch");
    }
    EvalReport report;
    report.cases = generated;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        CaseScores& cs = report.cases[i];
        for (const std::string& v : variants) {
            cs.scores[v] = cs.failed ? RougeScore{v, 0.0, 0.0, 0.0}
                                     : score_variant(cs.generated, cases[i].reference, v);
        }
    }
    for (const std::string& v : variants) {
        std::vector<double> recalls, precisions, f1s;
        for (const CaseScores& cs : report.cases) {
            const RougeScore& s = cs.scores.at(v);
            recalls.push_back(s.recall);
            precisions.push_back(s.precision);
            f1s.push_back(s.f1);
        }
        VariantSummary vs;
        std::tie(vs.mean_recall, vs.sd_recall) = mean_sd(recalls);
        std::tie(vs.mean_precision, vs.sd_precision) = mean_sd(precisions);
        std::tie(vs.mean_f1, vs.sd_f1) = mean_sd(f1s);
        report.summary[v] = vs;
    }
    return report;
}

EvalReport evaluate_corpus(const ModelWeights& model, const AdapterSet* adapters,
                           const Tokenizer& tk, const std::vector<EvalCase>& cases,
                           const std::vector<std::string>& variants, int max_new) {
    if (cases.empty()) {
        throw std::invalid_argument("evaluate_corpus: empty test set");
    }
    std::vector<CaseScores> generated;
    generated.reserve(cases.size());
    for (const EvalCase& c : cases) {
        CaseScores cs;
        cs.case_id = c.case_id;
        try {
            std::vector<int> prompt_ids;
            prompt_ids.push_back(Tokenizer::kBos);
            for (int id : encode(tk, c.prompt)) prompt_ids.push_back(id);
            if (static_cast<int>(prompt_ids.size()) >= model.config.max_seq_len) {
                throw std::runtime_error("prompt exceeds the model context");
            }
            const std::vector<int> out = generate(model, adapters, prompt_ids, max_new);
            cs.generated = decode(tk, out);
        } catch (const std::exception& e) {
            cs.failed = true;
            cs.error = e.what();
        }
        generated.push_back(std::move(cs));
    }
    return score_generations(generated, cases, variants);
}

std::string scores_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "case_id,variant,recall,precision,f1,failed\n";
    os.precision(17);
    for (const CaseScores& cs : report.cases) {
        for (const auto& [variant, s] : cs.scores) {
            os << cs.case_id << ",rouge" << variant << ',' << s.recall << ','
               << s.precision << ',' << s.f1 << ',' << (cs.failed ? 1 : 0) << '\n';
        }
    }
    return os.str();
}

std::string summary_markdown(const EvalReport& report) {
    std::ostringstream os;
    os << "| variant | recall | precision | f1 |\n";
    os << "|---------|--------|-----------|----|\n";
    os.precision(4);
    for (const auto& [variant, vs] : report.summary) {
        os << "| rouge" << variant << " | " << vs.mean_recall << " +- " << vs.sd_recall
           << " | " << vs.mean_precision << " +- " << vs.sd_precision << " | "
           << vs.mean_f1 << " +- " << vs.sd_f1 << " |\n";
    }
    return os.str();
}

std::string summary_json(const EvalReport& report) {
    nlohmann::json j;
    for (const auto& [variant, vs] : report.summary) {
        nlohmann::json entry;
        entry["recall"] = {{"mean", vs.mean_recall}, {"sd", vs.sd_recall}};
        entry["precision"] = {{"mean", vs.mean_precision}, {"sd", vs.sd_precision}};
        entry["f1"] = {{"mean", vs.mean_f1}, {"sd", vs.sd_f1}};
        j["rouge" + variant] = entry;
    }
    j["cases"] = report.cases.size();
    return j.dump(2);
}

}  // namespace letterlm
