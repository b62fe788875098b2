// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/lora.hpp"

#include <algorithm>
#include <stdexcept>

namespace letterlm {

namespace {

void check_shapes(const Matrix& w0, const LoraAdapter& adapter) {
    if (adapter.B.rows() != w0.rows() || adapter.A.cols() != w0.cols() ||
        adapter.B.cols() != adapter.rank || adapter.A.rows() != adapter.rank) {
        throw std::invalid_argument(
            "lora: adapter shapes A " + std::to_string(adapter.A.rows()) + "x" +
            std::to_string(adapter.A.cols()) + ", B " + std::to_string(adapter.B.rows()) +
            "x" + std::to_string(adapter.B.cols()) + " do not fit base " +
            std::to_string(w0.rows()) + "x" + std::to_string(w0.cols()));
    }
}

}  // namespace

LoraAdapter lora_init(int d, int k, int r, double alpha, double dropout, Rng& rng,
                      std::string target_name) {
    if (r < 1 || r > std::min(d, k)) {
        throw std::invalid_argument("lora_init: rank " + std::to_string(r) +
                                    " must be in [1, min(" + std::to_string(d) + ", " +
                                    std::to_string(k) + ")]");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw std::invalid_argument("lora_init: dropout must be in [0, 1)");
    }
    LoraAdapter adapter;
    adapter.rank = r;
    adapter.alpha = alpha;
    adapter.dropout = dropout;
    adapter.target_name = std::move(target_name);
    adapter.A.resize(r, k);
    for (Eigen::Index c = 0; c < adapter.A.cols(); ++c) {
        for (Eigen::Index row = 0; row < adapter.A.rows(); ++row) {
            adapter.A(row, c) = 0.02 * rng.gaussian();
        }
    }
    adapter.B = Matrix::Zero(d, r);
    return adapter;
}

Matrix lora_forward(const Matrix& w0, const LoraAdapter& adapter, const Matrix& x,
                    bool train_mode, std::uint64_t seed) {
    check_shapes(w0, adapter);
    if (x.rows() != w0.cols()) {
        throw std::invalid_argument("lora_forward: input rows " + std::to_string(x.rows()) +
                                    " do not match base cols " + std::to_string(w0.cols()));
    }
    Matrix path_in = x;
    if (train_mode && adapter.dropout > 0.0) {
        Rng rng(seed);
        const double inv = 1.0 / (1.0 - adapter.dropout);
        for (Eigen::Index c = 0; c < path_in.cols(); ++c) {
            for (Eigen::Index r = 0; r < path_in.rows(); ++r) {
                path_in(r, c) *= rng.uniform() < adapter.dropout ? 0.0 : inv;
            }
        }
    }
    return w0 * x + adapter.path_scale() * (adapter.B * (adapter.A * path_in));
}

Value lora_forward(Tape& tape, Value w0, Value a, Value b, const LoraAdapter& adapter,
                   Value x, bool train_mode, Rng* rng) {
    Value path_in = x;
    if (train_mode && adapter.dropout > 0.0) {
        if (rng == nullptr) {
            throw std::invalid_argument("lora_forward: train mode dropout needs an rng");
        }
        path_in = tape.dropout(x, adapter.dropout, *rng);
    }
    Value delta = tape.scale(tape.matmul(b, tape.matmul(a, path_in)), adapter.path_scale());
    return tape.add(tape.matmul(w0, x), delta);
}

Matrix lora_merge(const Matrix& w0, const LoraAdapter& adapter) {
    check_shapes(w0, adapter);
    return w0 + adapter.path_scale() * (adapter.B * adapter.A);
}

std::pair<long, long> lora_param_count(int d, int k, int r) {
    if (d < 1 || k < 1 || r < 1) {
        throw std::invalid_argument("lora_param_count: shapes must be positive");
    }
    const long trainable = static_cast<long>(r) * k + static_cast<long>(d) * r;
    const long frozen = static_cast<long>(d) * k;
    return {trainable, frozen};
}

}  // namespace letterlm
