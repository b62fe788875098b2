// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace letterlm {

// Deterministic word-level tokenizer. Text is split on whitespace runs;
// a run containing a newline becomes the literal "\n" token, so letters
// keep their line structure through an encode/decode round trip.
struct Tokenizer {
    static constexpr int kBos = 0;
    static constexpr int kEos = 1;
    static constexpr int kUnk = 2;
    static constexpr int kPad = 3;
    static constexpr int kNumSpecials = 4;

    std::vector<std::string> id_to_token;
    std::unordered_map<std::string, int> token_to_id;

    int size() const { return static_cast<int>(id_to_token.size()); }
    int id_of(const std::string& token) const;
};

// Splits into word tokens; whitespace runs containing '\n' yield a "\n"
// token. Punctuation stays attached to its word.
std::vector<std::string> split_tokens(const std::string& text);

// Vocabulary of the most frequent tokens, capped so the total size
// including the four specials is at most max_size. Ties break
// lexicographically; rebuilding from the same corpus is id-identical.
Tokenizer build_vocab(const std::vector<std::string>& corpus, int max_size);

// Out-of-vocabulary tokens map to <unk>; no bos/eos framing is added.
std::vector<int> encode(const Tokenizer& tk, const std::string& text);

// Joins with single spaces; "\n" tokens render as newlines. Rejects ids
// outside [0, size).
std::string decode(const Tokenizer& tk, const std::vector<int>& ids);

}  // namespace letterlm
