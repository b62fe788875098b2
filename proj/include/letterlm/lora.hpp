// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>

#include "letterlm/tape.hpp"

namespace letterlm {

// Low-rank adapter attached to one named projection. The base weight
// W0 [d x k] stays frozen; the trainable delta is B [d x r] * A [r x k],
// applied with an alpha/r multiplier on a parallel path.
struct LoraAdapter {
    Matrix A;  // [r x k]
    Matrix B;  // [d x r], zero at init so the delta starts at exactly zero
    int rank = 0;
    double alpha = 0.0;
    double dropout = 0.0;
    std::string target_name;

    double path_scale() const { return alpha / static_cast<double>(rank); }
};

// A ~ N(0, 0.02), B = 0: the adapted forward equals the base forward at
// step 0. Rejects r < 1 or r > min(d, k).
LoraAdapter lora_init(int d, int k, int r, double alpha, double dropout, Rng& rng,
                      std::string target_name = {});

// W0*x + (alpha/r) * B * (A * drop(x)). Dropout hits only the adapter
// path and only in train mode; eval mode is deterministic.
Matrix lora_forward(const Matrix& w0, const LoraAdapter& adapter, const Matrix& x,
                    bool train_mode = false, std::uint64_t seed = 0);

// Tape route used in training: same arithmetic with A, B as trainable
// leaves and w0 as a frozen leaf.
Value lora_forward(Tape& tape, Value w0, Value a, Value b, const LoraAdapter& adapter,
                   Value x, bool train_mode, Rng* rng);

// W0 + (alpha/r) * B * A.
Matrix lora_merge(const Matrix& w0, const LoraAdapter& adapter);

// {trainable, frozen} parameter counts for one adapted [d x k] weight.
std::pair<long, long> lora_param_count(int d, int k, int r);

}  // namespace letterlm
