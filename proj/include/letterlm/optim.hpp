// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "letterlm/quant.hpp"
#include "letterlm/tape.hpp"

namespace letterlm {

struct AdamWConfig {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    // Store moments block-quantized to 8 bits between steps.
    bool quantized_state = false;
    int state_block = 64;
};

// Per-parameter first/second moments. With quantized_state the moments
// live as 8-bit codes between steps and are dequantized, updated, and
// requantized inside each step.
struct MomentPair {
    bool initialized = false;
    Matrix m;
    Matrix v;
    QuantizedMatrix mq;
    QuantizedMatrix vq;
};

class AdamW {
public:
    explicit AdamW(AdamWConfig config) : config_(config) {}

    // Bias-corrected AdamW update with decoupled weight decay. Rejects
    // non-finite gradients, naming the parameter.
    void step_group(std::map<std::string, Matrix*>& params,
                    const std::map<std::string, Matrix>& grads);

    long step_count() const { return step_count_; }
    void bump_step() { ++step_count_; }

    const AdamWConfig& config() const { return config_; }
    std::map<std::string, MomentPair>& state() { return state_; }
    const std::map<std::string, MomentPair>& state() const { return state_; }

    // Accounted bytes of moment state for one parameter of the given size.
    std::size_t state_bytes_per_param(std::size_t entries) const;

private:
    AdamWConfig config_;
    long step_count_ = 0;  // shared across groups; bump once per optimizer step
    std::map<std::string, MomentPair> state_;
};

// Mean of micro-batch gradients. Rejects an empty list or ragged shapes.
Matrix accumulate(const std::vector<Matrix>& micro_gradients);
std::map<std::string, Matrix> accumulate(
    const std::vector<std::map<std::string, Matrix>>& micro_gradients);

}  // namespace letterlm
