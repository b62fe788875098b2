// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "letterlm/lora.hpp"
#include "letterlm/quant.hpp"
#include "letterlm/tape.hpp"
#include "letterlm/tokenizer.hpp"

namespace letterlm {

// The eight adapter-capable projections.
inline constexpr std::array<const char*, 8> kLoraTargetNames = {
    "q_proj", "k_proj", "v_proj", "o_proj", "gate_proj", "up_proj", "down_proj", "lm_head"};

bool is_lora_target_name(const std::string& name);

struct ModelConfig {
    int vocab_size = 512;
    int d_model = 64;
    int n_heads = 2;
    int n_layers = 2;
    int d_ff = 128;
    int max_seq_len = 256;
    std::vector<std::string> lora_targets{kLoraTargetNames.begin(), kLoraTargetNames.end()};

    int head_dim() const { return d_model / n_heads; }
    void validate() const;  // d_model % n_heads == 0, targets subset of the eight
};

// Pre-norm decoder block: x + o(attn(norm1(x))), then
// x + down(silu(gate(norm2(x))) .* up(norm2(x))).
struct LayerWeights {
    Matrix q_proj, k_proj, v_proj, o_proj;  // [d x d]
    Matrix gate_proj, up_proj;              // [d_ff x d]
    Matrix down_proj;                       // [d x d_ff]
    Matrix attn_norm, mlp_norm;             // [d x 1] rms gains
};

struct ModelWeights {
    ModelConfig config;
    Matrix tok_embed;  // [d x vocab]
    Matrix pos_embed;  // [d x max_seq]
    std::vector<LayerWeights> layers;
    Matrix final_norm;  // [d x 1]
    Matrix lm_head;     // [vocab x d]
};

ModelWeights init_model(const ModelConfig& config, Rng& rng, double init_std = 0.02);

// FNV-1a over the raw weight bytes; used to assert the frozen base never
// moves during adapter training.
std::uint64_t weights_checksum(const ModelWeights& w);

// Adapters keyed by qualified projection name ("layers.0.q_proj",
// "lm_head"). One adapter per (layer, target) instance.
struct AdapterSet {
    std::map<std::string, LoraAdapter> by_name;

    bool empty() const { return by_name.empty(); }
    long trainable_params() const;
};

AdapterSet init_adapters(const ModelConfig& config, int rank, double alpha,
                         double dropout, Rng& rng);

std::string qualified_target(int layer, const std::string& target);

// Quantized frozen base: the eight projection kinds are stored
// block-quantized, embeddings and norms stay at full precision.
struct QuantizedBase {
    int bit_width = 8;
    int block_size = 64;
    std::map<std::string, QuantizedMatrix> projections;  // qualified name -> codes
};

QuantizedBase quantize_base(const ModelWeights& w, int bit_width, int block_size);
// Replaces each projection with its dequantized form (codes stay put in
// the QuantizedBase for checkpointing).
ModelWeights apply_quantized_base(const ModelWeights& w, const QuantizedBase& qb);

// Leaf bindings for a training step: every parameter registered on the
// tape once, trainable or frozen depending on mode. Entries present
// before the forward pass are reused instead of freshly created, which
// lets a caller substitute its own leaves (finite-difference checks).
struct ModelBindings {
    std::map<std::string, Value> params;    // weight name -> leaf
    std::map<std::string, Value> adapters;  // "name.A" / "name.B" -> leaf
};

enum class TrainableSet { kAdaptersOnly, kAll };

// Registers leaves and runs the causal forward pass; returns [vocab x seq]
// logits. `train_mode` enables adapter-path dropout (needs rng).
Value model_forward(Tape& tape, const ModelWeights& w, const AdapterSet* adapters,
                    ModelBindings& bindings, const std::vector<int>& ids,
                    TrainableSet trainable, bool train_mode, Rng* rng);

// Eval logits without gradient bookkeeping.
Matrix model_logits(const ModelWeights& w, const AdapterSet* adapters,
                    const std::vector<int>& ids);

// Greedy decoding from prompt ids; stops at </s> or max_new tokens.
// Returns only the newly generated ids (without the terminating </s>).
std::vector<int> generate(const ModelWeights& w, const AdapterSet* adapters,
                          const std::vector<int>& prompt_ids, int max_new);

}  // namespace letterlm
