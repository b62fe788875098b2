// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "letterlm/model.hpp"
#include "letterlm/optim.hpp"
#include "letterlm/pager.hpp"

namespace letterlm {

struct TrainConfig {
    double learning_rate = 1e-5;
    int micro_batch = 2;
    int accumulation_steps = 2;
    long total_steps = 500;  // 500 for the summary task, 15000 for letters
    int max_tokens = 1500;   // 1500 summary / 2000 letters
    std::uint64_t seed = 0;

    // Adapter fine-tuning (the default) vs full-parameter training.
    bool use_lora = true;
    int lora_rank = 32;
    double lora_alpha = 64.0;
    double lora_dropout = 0.05;

    bool quantize_base = false;
    int base_bits = 8;
    int base_block = 64;
    bool quantized_optim_state = false;

    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;

    void validate() const;
};

// One training sequence: <s> prompt completion </s>, with the prompt
// length (including <s>) recorded so the loss can mask prompt positions.
struct TokenizedExample {
    std::vector<int> ids;
    std::size_t prompt_len = 0;
    std::string source_id;
};

struct StepMetrics {
    long step = 0;
    double loss = 0.0;
    std::size_t fast_pool_bytes = 0;  // peak fast-pool usage up to this step
    std::size_t offload_events = 0;   // movement events during this step
    double elapsed_ms = 0.0;
};

struct TrainOutput {
    ModelWeights model;  // dequantized view when the base is quantized
    AdapterSet adapters;
    std::optional<QuantizedBase> quantized_base;
    std::vector<StepMetrics> metrics;
    MemoryBudget budget;
    std::size_t largest_group_bytes = 0;
    std::size_t total_group_bytes = 0;
};

// Runs total_steps AdamW updates over the dataset with gradient
// accumulation and paged optimizer state. Deterministic for a fixed
// seed; the memory budget changes only the event log, never the result.
TrainOutput train(const ModelWeights& initial, const std::vector<TokenizedExample>& dataset,
                  const TrainConfig& config, MemoryBudget budget,
                  const AdapterSet* initial_adapters = nullptr);

std::string metrics_csv(const std::vector<StepMetrics>& metrics);

// Byte footprint counted against the fast pool for one parameter group:
// parameters + gradients + optimizer moments.
std::size_t group_footprint_bytes(std::size_t entries, bool quantized_state,
                                  int state_block);

}  // namespace letterlm
