// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "letterlm/checkpoint.hpp"

using namespace letterlm;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const char* name)
        : path(std::filesystem::temp_directory_path() / name) {}
    ~TempFile() { std::filesystem::remove(path); }
};

Checkpoint make_checkpoint(bool quantized) {
    Rng rng(81);
    ModelConfig cfg;
    cfg.vocab_size = 32;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.n_layers = 2;
    cfg.d_ff = 32;
    cfg.max_seq_len = 16;

    Checkpoint ckpt;
    ckpt.model = init_model(cfg, rng);
    ckpt.tokenizer = build_vocab({"alpha beta gamma delta\nepsilon"}, 32);
    ckpt.adapters = init_adapters(cfg, 2, 4.0, 0.05, rng);
    for (auto& [name, adapter] : ckpt.adapters.by_name) {
        adapter.B = Matrix::Random(adapter.B.rows(), adapter.B.cols());
    }
    if (quantized) {
        ckpt.quantized_base = quantize_base(ckpt.model, 4, 64);
        ckpt.model = apply_quantized_base(ckpt.model, *ckpt.quantized_base);
    }
    return ckpt;
}

}  // namespace

TEST_CASE("full-precision checkpoint round-trips to bit-identical outputs") {
    TempFile file("letterlm_test_full.ckpt");
    Checkpoint original = make_checkpoint(false);
    save_checkpoint(file.path, original);
    Checkpoint loaded = load_checkpoint(file.path);

    CHECK(loaded.tokenizer.id_to_token == original.tokenizer.id_to_token);
    CHECK(weights_checksum(loaded.model) == weights_checksum(original.model));

    const std::vector<int> ids{1, 4, 9, 16, 25};
    Matrix a = model_logits(original.model, &original.adapters, ids);
    Matrix b = model_logits(loaded.model, &loaded.adapters, ids);
    CHECK(a == b);
}

TEST_CASE("quantized checkpoint restores codes, scales, and outputs exactly") {
    TempFile file("letterlm_test_quant.ckpt");
    Checkpoint original = make_checkpoint(true);
    save_checkpoint(file.path, original);
    Checkpoint loaded = load_checkpoint(file.path);

    REQUIRE(loaded.quantized_base.has_value());
    CHECK(loaded.quantized_base->bit_width == 4);
    for (const auto& [name, q] : original.quantized_base->projections) {
        const QuantizedMatrix& r = loaded.quantized_base->projections.at(name);
        CHECK(r.codes == q.codes);
        CHECK(r.scales == q.scales);
    }
    CHECK(weights_checksum(loaded.model) == weights_checksum(original.model));

    const std::vector<int> ids{2, 3, 5, 7};
    CHECK(model_logits(original.model, &original.adapters, ids) ==
          model_logits(loaded.model, &loaded.adapters, ids));
}

TEST_CASE("standalone adapter files round-trip bit-exactly") {
    TempFile file("letterlm_test_adapters.ckpt");
    Checkpoint ckpt = make_checkpoint(false);
    save_adapters(file.path, ckpt.adapters);
    AdapterSet loaded = load_adapters(file.path);

    REQUIRE(loaded.by_name.size() == ckpt.adapters.by_name.size());
    for (const auto& [name, adapter] : ckpt.adapters.by_name) {
        const LoraAdapter& other = loaded.by_name.at(name);
        CHECK(other.A == adapter.A);
        CHECK(other.B == adapter.B);
        CHECK(other.rank == adapter.rank);
        CHECK(other.alpha == adapter.alpha);
        CHECK(other.dropout == adapter.dropout);
    }
}

TEST_CASE("loading garbage fails cleanly") {
    TempFile file("letterlm_test_garbage.ckpt");
    {
        std::FILE* f = std::fopen(file.path.string().c_str(), "wb");
        std::fputs("not a checkpoint", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_checkpoint(file.path), std::runtime_error);
    CHECK_THROWS_AS(load_adapters(file.path), std::runtime_error);
}
