// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "letterlm/rng.hpp"

namespace letterlm {

using Matrix = Eigen::MatrixXd;

// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Value {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense matrices. Nodes are appended in topological
// order by construction; backward() walks them once in reverse. A tape is
// built fresh for every forward pass and never reused across steps.
class Tape {
public:
    enum class Op {
        kLeaf,
        kMatMul,
        kAdd,
        kScale,
        kHadamard,
        kTranspose,
        kGatherCols,
        kMiddleRows,
        kVStack,
        kSoftmaxRows,
        kRmsNormCols,
        kSilu,
        kDropout,
        kSum,
        kCrossEntropyCols,
    };

    // Leaves. Trainable leaves receive gradients in backward(); frozen
    // leaves never have gradient storage allocated.
    Value leaf(Matrix m, bool trainable);
    Value constant(Matrix m) { return leaf(std::move(m), false); }

    Value matmul(Value a, Value b);
    Value add(Value a, Value b);
    Value scale(Value a, double s);
    Value hadamard(Value a, Value b);
    Value transpose(Value a);

    // out.col(i) = m.col(ids[i]); duplicate ids accumulate in backward.
    Value gather_cols(Value m, std::vector<int> ids);
    Value middle_rows(Value a, int start, int n);
    Value vstack(const std::vector<Value>& parts);

    // Row-wise softmax with max-subtraction; pair with an additive mask
    // constant for causal attention.
    Value softmax_rows(Value a);

    // Column-wise RMS normalization with a learned per-row gain vector.
    Value rmsnorm_cols(Value x, Value gain, double eps = 1e-6);
    Value silu(Value a);

    // Inverted dropout on the forward values; marks the tape stochastic.
    Value dropout(Value a, double p, Rng& rng);

    Value sum(Value a);

    // Mean next-token cross entropy over the columns of a [vocab x seq]
    // logit matrix, restricted to positions with mask[t] != 0.
    Value cross_entropy_cols(Value logits, std::vector<int> targets,
                             std::vector<std::uint8_t> mask);

    const Matrix& value(Value v) const { return node(v.id).val; }
    // Gradient of the last backward() target w.r.t. a trainable leaf or
    // any intermediate node that required grad.
    const Matrix& grad(Value v) const;
    bool has_grad(Value v) const;

    // Accumulates into trainable leaves. loss must be 1x1.
    void backward(Value loss);

    bool stochastic() const { return stochastic_; }
    std::size_t size() const { return nodes_.size(); }
    void clear();

private:
    struct Node {
        Op op = Op::kLeaf;
        std::vector<int> inputs;
        Matrix val;
        Matrix grad;
        bool trainable = false;
        bool needs_grad = false;
        bool grad_ready = false;
        double scalar = 0.0;
        int i0 = 0, i1 = 0;
        std::vector<int> indices;
        std::vector<std::uint8_t> mask;
        Matrix aux;  // op-specific cache (dropout mask, softmax probs, rms)
    };

    Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    Value push(Node n);
    void add_grad(int id, const Matrix& g);
    void check(Value v) const;

    std::vector<Node> nodes_;
    bool stochastic_ = false;
};

// Max over all parameter entries of |analytic - central difference| /
// max(1, |analytic|). `build` must assemble a scalar loss from the leaves
// handed to it; it is invoked many times on perturbed copies of `params`.
// Rejects stochastic builds (dropout enabled) and non-scalar losses.
double grad_check(std::span<const Matrix> params,
                  const std::function<Value(Tape&, const std::vector<Value>&)>& build,
                  double epsilon);

}  // namespace letterlm
