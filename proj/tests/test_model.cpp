// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "letterlm/model.hpp"

using namespace letterlm;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.vocab_size = 32;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.n_layers = 2;
    cfg.d_ff = 32;
    cfg.max_seq_len = 16;
    return cfg;
}

}  // namespace

TEST_CASE("vocabulary building and round trips") {
    Tokenizer tk = build_vocab({"a a b"}, 10);
    CHECK(tk.size() == 4 + 2);
    CHECK(tk.id_of("a") == 4);  // most frequent first
    CHECK(tk.id_of("b") == 5);

    SUBCASE("ties break lexicographically") {
        Tokenizer tie = build_vocab({"y x"}, 10);
        CHECK(tie.id_of("x") < tie.id_of("y"));
    }
    SUBCASE("rebuild gives identical ids") {
        Tokenizer again = build_vocab({"a a b"}, 10);
        CHECK(again.id_to_token == tk.id_to_token);
    }
    SUBCASE("empty corpus is rejected") {
        CHECK_THROWS_AS(build_vocab({}, 10), std::invalid_argument);
    }
}

TEST_CASE("encode/decode behavior") {
    Tokenizer tk = build_vocab({"the quick brown fox\njumps over"}, 64);
    CHECK(encode(tk, "").empty());
    CHECK(decode(tk, {}) == "");

    const std::string known = "the quick fox\njumps";
    CHECK(decode(tk, encode(tk, known)) == known);

    auto ids = encode(tk, "the shiny fox");
    CHECK(ids[1] == Tokenizer::kUnk);
    CHECK(decode(tk, ids) == "the <unk> fox");

    CHECK_THROWS_AS(decode(tk, {tk.size()}), std::invalid_argument);
}

TEST_CASE("config validation") {
    ModelConfig cfg = tiny_config();
    cfg.n_heads = 3;  // 16 % 3 != 0
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.lora_targets = {"mystery_proj"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero-initialized adapters leave every logit bit identical") {
    Rng rng(31);
    ModelWeights w = init_model(tiny_config(), rng);
    AdapterSet adapters = init_adapters(w.config, 4, 8.0, 0.05, rng);
    REQUIRE(adapters.by_name.size() == 2 * 7 + 1);  // seven per layer + lm_head

    const std::vector<int> ids{1, 5, 9, 3};
    Matrix plain = model_logits(w, nullptr, ids);
    Matrix adapted = model_logits(w, &adapters, ids);
    CHECK(plain == adapted);
}

TEST_CASE("causality: changing a future token leaves earlier logits unchanged") {
    Rng rng(32);
    ModelWeights w = init_model(tiny_config(), rng);
    std::vector<int> ids{4, 7, 2, 9, 12};
    Matrix before = model_logits(w, nullptr, ids);
    for (int perturbed : {5, 19, 31, 0}) {
        ids[4] = perturbed;
        Matrix after = model_logits(w, nullptr, ids);
        CHECK(before.leftCols(4) == after.leftCols(4));
    }
}

TEST_CASE("overlong sequences report the budget") {
    Rng rng(33);
    ModelWeights w = init_model(tiny_config(), rng);
    std::vector<int> ids(static_cast<std::size_t>(w.config.max_seq_len) + 1, 1);
    CHECK_THROWS_WITH_AS(model_logits(w, nullptr, ids), doctest::Contains("16"),
                         std::invalid_argument);
}

TEST_CASE("generation is deterministic and respects max_new") {
    Rng rng(34);
    ModelWeights w = init_model(tiny_config(), rng);
    CHECK(generate(w, nullptr, {1, 2, 3}, 0).empty());
    auto a = generate(w, nullptr, {1, 2, 3}, 8);
    auto b = generate(w, nullptr, {1, 2, 3}, 8);
    CHECK(a == b);
    CHECK_THROWS_AS(generate(w, nullptr, {}, 4), std::invalid_argument);
}

TEST_CASE("base weights keep their checksum when only adapters train") {
    Rng rng(35);
    ModelWeights w = init_model(tiny_config(), rng);
    const std::uint64_t before = weights_checksum(w);
    AdapterSet adapters = init_adapters(w.config, 2, 4.0, 0.0, rng);

    Tape tape;
    ModelBindings bindings;
    const std::vector<int> ids{3, 1, 4, 1, 5};
    Value logits = model_forward(tape, w, &adapters, bindings, ids,
                                 TrainableSet::kAdaptersOnly, false, nullptr);
    std::vector<int> targets{1, 4, 1, 5, 9};
    Value loss = tape.cross_entropy_cols(logits, targets, {1, 1, 1, 1, 1});
    tape.backward(loss);

    for (const auto& [name, leaf] : bindings.params) {
        INFO(name);
        CHECK_FALSE(tape.has_grad(leaf));
    }
    int with_grad = 0;
    for (const auto& [name, leaf] : bindings.adapters) {
        if (tape.has_grad(leaf)) ++with_grad;
    }
    CHECK(with_grad > 0);
    CHECK(weights_checksum(w) == before);
}

TEST_CASE("gradient check through the full model over all adapters") {
    Rng rng(36);
    ModelConfig cfg = tiny_config();
    ModelWeights w = init_model(cfg, rng);
    AdapterSet adapters = init_adapters(cfg, 2, 4.0, 0.0, rng);
    // Move B off zero so the check exercises curvature in both factors.
    for (auto& [name, adapter] : adapters.by_name) {
        for (Eigen::Index c = 0; c < adapter.B.cols(); ++c) {
            for (Eigen::Index r = 0; r < adapter.B.rows(); ++r) {
                adapter.B(r, c) = 0.05 * rng.gaussian();
            }
        }
    }
    const std::vector<int> ids{3, 9, 27, 17};
    const std::vector<int> targets{9, 27, 17, 2};
    const std::vector<std::uint8_t> mask{0, 1, 1, 1};

    std::vector<std::string> leaf_names;
    std::vector<Matrix> leaf_values;
    for (const auto& [name, adapter] : adapters.by_name) {
        leaf_names.push_back(name + ".A");
        leaf_values.push_back(adapter.A);
        leaf_names.push_back(name + ".B");
        leaf_values.push_back(adapter.B);
    }

    const double err = grad_check(
        leaf_values,
        [&](Tape& tape, const std::vector<Value>& leaves) {
            ModelBindings bindings;
            for (std::size_t i = 0; i < leaf_names.size(); ++i) {
                bindings.adapters[leaf_names[i]] = leaves[i];
            }
            Value logits = model_forward(tape, w, &adapters, bindings, ids,
                                         TrainableSet::kAdaptersOnly, false, nullptr);
            return tape.cross_entropy_cols(logits, targets, mask);
        },
        1e-5);
    CHECK(err < 1e-4);
}
