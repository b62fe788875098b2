// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace letterlm {

namespace {

const char* kSpecialNames[Tokenizer::kNumSpecials] = {"<s>", "</s>", "<unk>", "<pad>"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

}  // namespace

int Tokenizer::id_of(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            bool newline = false;
            while (i < text.size() && is_space(text[i])) {
                newline = newline || text[i] == '\n';
                ++i;
            }
            if (newline) out.emplace_back("\n");
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

Tokenizer build_vocab(const std::vector<std::string>& corpus, int max_size) {
    if (corpus.empty()) {
        throw std::invalid_argument("build_vocab: empty corpus");
    }
    if (max_size < Tokenizer::kNumSpecials) {
        throw std::invalid_argument("build_vocab: max_size must fit the special tokens");
    }
    std::map<std::string, long> counts;  // ordered map fixes the tie order
    for (const std::string& doc : corpus) {
        for (const std::string& tok : split_tokens(doc)) ++counts[tok];
    }

    std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Tokenizer tk;
    for (const char* name : kSpecialNames) tk.id_to_token.emplace_back(name);
    const std::size_t cap = static_cast<std::size_t>(max_size - Tokenizer::kNumSpecials);
    for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) {
        tk.id_to_token.push_back(ranked[i].first);
    }
    for (std::size_t i = 0; i < tk.id_to_token.size(); ++i) {
        tk.token_to_id[tk.id_to_token[i]] = static_cast<int>(i);
    }
    return tk;
}

std::vector<int> encode(const Tokenizer& tk, const std::string& text) {
    std::vector<int> ids;
    for (const std::string& tok : split_tokens(text)) {
        ids.push_back(tk.id_of(tok));
    }
    return ids;
}

std::string decode(const Tokenizer& tk, const std::vector<int>& ids) {
    std::string out;
    bool need_space = false;
    for (int id : ids) {
        if (id < 0 || id >= tk.size()) {
            throw std::invalid_argument("decode: id " + std::to_string(id) +
                                        " out of range [0, " + std::to_string(tk.size()) +
                                        ")");
        }
        const std::string& tok = tk.id_to_token[static_cast<std::size_t>(id)];
        if (tok == "\n") {
            out += '\n';
            need_space = false;
            continue;
        }
        if (need_space) out += ' ';
        out += tok;
        need_space = true;
    }
    return out;
}

}  // namespace letterlm
