// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace letterlm {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void Tape::check(Value v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw std::invalid_argument("tape: value handle out of range");
    }
}

Value Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

Value Tape::leaf(Matrix m, bool trainable) {
    Node n;
    n.op = Op::kLeaf;
    n.val = std::move(m);
    n.trainable = trainable;
    n.needs_grad = trainable;
    return push(std::move(n));
}

Value Tape::matmul(Value a, Value b) {
    check(a);
    check(b);
    const Matrix& A = node(a.id).val;
    const Matrix& B = node(b.id).val;
    if (A.cols() != B.rows()) {
        throw std::invalid_argument("matmul: dimension mismatch, " + shape_str(A) +
                                    " * " + shape_str(B));
    }
    Node n;
    n.op = Op::kMatMul;
    n.inputs = {a.id, b.id};
    n.val = A * B;
    n.needs_grad = node(a.id).needs_grad || node(b.id).needs_grad;
    return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
    check(a);
    check(b);
    const Matrix& A = node(a.id).val;
    const Matrix& B = node(b.id).val;
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("add: shape mismatch, " + shape_str(A) + " + " +
                                    shape_str(B));
    }
    Node n;
    n.op = Op::kAdd;
    n.inputs = {a.id, b.id};
    n.val = A + B;
    n.needs_grad = node(a.id).needs_grad || node(b.id).needs_grad;
    return push(std::move(n));
}

Value Tape::scale(Value a, double s) {
    check(a);
    Node n;
    n.op = Op::kScale;
    n.inputs = {a.id};
    n.scalar = s;
    n.val = node(a.id).val * s;
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::hadamard(Value a, Value b) {
    check(a);
    check(b);
    const Matrix& A = node(a.id).val;
    const Matrix& B = node(b.id).val;
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("hadamard: shape mismatch, " + shape_str(A) +
                                    " vs " + shape_str(B));
    }
    Node n;
    n.op = Op::kHadamard;
    n.inputs = {a.id, b.id};
    n.val = A.cwiseProduct(B);
    n.needs_grad = node(a.id).needs_grad || node(b.id).needs_grad;
    return push(std::move(n));
}

Value Tape::transpose(Value a) {
    check(a);
    Node n;
    n.op = Op::kTranspose;
    n.inputs = {a.id};
    n.val = node(a.id).val.transpose();
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::gather_cols(Value m, std::vector<int> ids) {
    check(m);
    const Matrix& M = node(m.id).val;
    Matrix out(M.rows(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= M.cols()) {
            throw std::invalid_argument("gather_cols: index " + std::to_string(ids[i]) +
                                        " out of range for " + shape_str(M));
        }
        out.col(static_cast<Eigen::Index>(i)) = M.col(ids[i]);
    }
    Node n;
    n.op = Op::kGatherCols;
    n.inputs = {m.id};
    n.indices = std::move(ids);
    n.val = std::move(out);
    n.needs_grad = node(m.id).needs_grad;
    return push(std::move(n));
}

Value Tape::middle_rows(Value a, int start, int count) {
    check(a);
    const Matrix& A = node(a.id).val;
    if (start < 0 || count < 0 || start + count > A.rows()) {
        throw std::invalid_argument("middle_rows: [" + std::to_string(start) + ", " +
                                    std::to_string(start + count) + ") out of range for " +
                                    shape_str(A));
    }
    Node n;
    n.op = Op::kMiddleRows;
    n.inputs = {a.id};
    n.i0 = start;
    n.i1 = count;
    n.val = A.middleRows(start, count);
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::vstack(const std::vector<Value>& parts) {
    if (parts.empty()) throw std::invalid_argument("vstack: no inputs");
    Eigen::Index rows = 0;
    Eigen::Index cols = node(parts[0].id).val.cols();
    for (Value p : parts) {
        check(p);
        if (node(p.id).val.cols() != cols) {
            throw std::invalid_argument("vstack: column count mismatch");
        }
        rows += node(p.id).val.rows();
    }
    Node n;
    n.op = Op::kVStack;
    n.val.resize(rows, cols);
    Eigen::Index at = 0;
    for (Value p : parts) {
        const Matrix& P = node(p.id).val;
        n.val.middleRows(at, P.rows()) = P;
        at += P.rows();
        n.inputs.push_back(p.id);
        n.needs_grad = n.needs_grad || node(p.id).needs_grad;
    }
    return push(std::move(n));
}

Value Tape::softmax_rows(Value a) {
    check(a);
    const Matrix& A = node(a.id).val;
    Matrix out = (A.colwise() - A.rowwise().maxCoeff()).array().exp().matrix();
    out.array().colwise() /= out.rowwise().sum().array();
    Node n;
    n.op = Op::kSoftmaxRows;
    n.inputs = {a.id};
    n.val = std::move(out);
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::rmsnorm_cols(Value x, Value gain, double eps) {
    check(x);
    check(gain);
    const Matrix& X = node(x.id).val;
    const Matrix& G = node(gain.id).val;
    if (G.rows() != X.rows() || G.cols() != 1) {
        throw std::invalid_argument("rmsnorm_cols: gain must be " +
                                    std::to_string(X.rows()) + "x1, got " + shape_str(G));
    }
    Matrix rms(1, X.cols());
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        double r = std::sqrt(X.col(c).squaredNorm() / static_cast<double>(X.rows()) + eps);
        rms(0, c) = r;
        out.col(c) = G.col(0).cwiseProduct(X.col(c)) / r;
    }
    Node n;
    n.op = Op::kRmsNormCols;
    n.inputs = {x.id, gain.id};
    n.val = std::move(out);
    n.aux = std::move(rms);
    n.needs_grad = node(x.id).needs_grad || node(gain.id).needs_grad;
    return push(std::move(n));
}

Value Tape::silu(Value a) {
    check(a);
    const Matrix& A = node(a.id).val;
    Matrix sig = (1.0 / (1.0 + (-A.array()).exp())).matrix();
    Node n;
    n.op = Op::kSilu;
    n.inputs = {a.id};
    n.val = A.cwiseProduct(sig);
    n.aux = std::move(sig);
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::dropout(Value a, double p, Rng& rng) {
    check(a);
    if (p < 0.0 || p >= 1.0) {
        throw std::invalid_argument("dropout: p must be in [0, 1)");
    }
    const Matrix& A = node(a.id).val;
    Matrix keep(A.rows(), A.cols());
    const double inv = 1.0 / (1.0 - p);
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            keep(r, c) = rng.uniform() < p ? 0.0 : inv;
        }
    }
    stochastic_ = true;
    Node n;
    n.op = Op::kDropout;
    n.inputs = {a.id};
    n.val = A.cwiseProduct(keep);
    n.aux = std::move(keep);
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::sum(Value a) {
    check(a);
    Node n;
    n.op = Op::kSum;
    n.inputs = {a.id};
    n.val = Matrix::Constant(1, 1, node(a.id).val.sum());
    n.needs_grad = node(a.id).needs_grad;
    return push(std::move(n));
}

Value Tape::cross_entropy_cols(Value logits, std::vector<int> targets,
                               std::vector<std::uint8_t> mask) {
    check(logits);
    const Matrix& L = node(logits.id).val;
    const auto seq = static_cast<std::size_t>(L.cols());
    if (targets.size() != seq || mask.size() != seq) {
        throw std::invalid_argument("cross_entropy_cols: targets/mask length must equal " +
                                    std::to_string(seq));
    }
    long active = 0;
    for (std::uint8_t m : mask) active += m ? 1 : 0;
    if (active == 0) {
        throw std::invalid_argument("cross_entropy_cols: no unmasked positions");
    }

    const Eigen::RowVectorXd col_max = L.colwise().maxCoeff();
    Matrix probs = (L.rowwise() - col_max).array().exp().matrix();
    const Eigen::RowVectorXd z = probs.colwise().sum();
    probs.array().rowwise() /= z.array();
    double loss = 0.0;
    for (Eigen::Index c = 0; c < L.cols(); ++c) {
        if (!mask[static_cast<std::size_t>(c)]) continue;
        int t = targets[static_cast<std::size_t>(c)];
        if (t < 0 || t >= L.rows()) {
            throw std::invalid_argument("cross_entropy_cols: target id out of range");
        }
        loss += std::log(z(c)) + col_max(c) - L(t, c);
    }
    Node n;
    n.op = Op::kCrossEntropyCols;
    n.inputs = {logits.id};
    n.indices = std::move(targets);
    n.mask = std::move(mask);
    n.val = Matrix::Constant(1, 1, loss / static_cast<double>(active));
    n.aux = std::move(probs);
    n.scalar = static_cast<double>(active);
    n.needs_grad = node(logits.id).needs_grad;
    return push(std::move(n));
}

const Matrix& Tape::grad(Value v) const {
    check(v);
    const Node& n = node(v.id);
    if (!n.grad_ready) {
        throw std::logic_error("tape: no gradient recorded for this node");
    }
    return n.grad;
}

bool Tape::has_grad(Value v) const {
    check(v);
    return node(v.id).grad_ready;
}

void Tape::add_grad(int id, const Matrix& g) {
    Node& n = node(id);
    if (!n.needs_grad) return;
    if (!n.grad_ready) {
        n.grad = g;
        n.grad_ready = true;
    } else {
        n.grad += g;
    }
}

void Tape::backward(Value loss) {
    check(loss);
    Node& top = node(loss.id);
    if (top.val.rows() != 1 || top.val.cols() != 1) {
        throw std::invalid_argument("backward: loss must be a 1x1 scalar node, got " +
                                    shape_str(top.val));
    }
    if (!top.needs_grad) return;  // no trainable leaf feeds the loss
    add_grad(loss.id, Matrix::Constant(1, 1, 1.0));

    for (int id = loss.id; id >= 0; --id) {
        Node& n = node(id);
        if (!n.grad_ready || n.op == Op::kLeaf) continue;
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::kMatMul: {
                const Node& a = node(n.inputs[0]);
                const Node& b = node(n.inputs[1]);
                if (a.needs_grad) add_grad(n.inputs[0], g * b.val.transpose());
                if (b.needs_grad) add_grad(n.inputs[1], a.val.transpose() * g);
                break;
            }
            case Op::kAdd:
                add_grad(n.inputs[0], g);
                add_grad(n.inputs[1], g);
                break;
            case Op::kScale:
                add_grad(n.inputs[0], g * n.scalar);
                break;
            case Op::kHadamard:
                add_grad(n.inputs[0], g.cwiseProduct(node(n.inputs[1]).val));
                add_grad(n.inputs[1], g.cwiseProduct(node(n.inputs[0]).val));
                break;
            case Op::kTranspose:
                add_grad(n.inputs[0], g.transpose());
                break;
            case Op::kGatherCols: {
                const Node& src = node(n.inputs[0]);
                if (src.needs_grad) {
                    Matrix gm = Matrix::Zero(src.val.rows(), src.val.cols());
                    for (std::size_t i = 0; i < n.indices.size(); ++i) {
                        gm.col(n.indices[i]) += g.col(static_cast<Eigen::Index>(i));
                    }
                    add_grad(n.inputs[0], gm);
                }
                break;
            }
            case Op::kMiddleRows: {
                const Node& src = node(n.inputs[0]);
                if (src.needs_grad) {
                    Matrix gm = Matrix::Zero(src.val.rows(), src.val.cols());
                    gm.middleRows(n.i0, n.i1) = g;
                    add_grad(n.inputs[0], gm);
                }
                break;
            }
            case Op::kVStack: {
                Eigen::Index at = 0;
                for (int in : n.inputs) {
                    const Eigen::Index r = node(in).val.rows();
                    add_grad(in, g.middleRows(at, r));
                    at += r;
                }
                break;
            }
            case Op::kSoftmaxRows: {
                const Matrix& y = n.val;
                const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
                Matrix gx = y.cwiseProduct(g.colwise() - dots);
                add_grad(n.inputs[0], gx);
                break;
            }
            case Op::kRmsNormCols: {
                const Node& xn = node(n.inputs[0]);
                const Node& gn = node(n.inputs[1]);
                const Matrix& X = xn.val;
                const Matrix& G = gn.val;
                const double d = static_cast<double>(X.rows());
                if (gn.needs_grad) {
                    Matrix gg = Matrix::Zero(G.rows(), 1);
                    for (Eigen::Index c = 0; c < X.cols(); ++c) {
                        gg.col(0) += g.col(c).cwiseProduct(X.col(c)) / n.aux(0, c);
                    }
                    add_grad(n.inputs[1], gg);
                }
                if (xn.needs_grad) {
                    Matrix gx(X.rows(), X.cols());
                    for (Eigen::Index c = 0; c < X.cols(); ++c) {
                        const double r = n.aux(0, c);
                        Eigen::VectorXd gd = G.col(0).cwiseProduct(g.col(c));
                        double dot = gd.dot(X.col(c));
                        gx.col(c) = gd / r - X.col(c) * (dot / (d * r * r * r));
                    }
                    add_grad(n.inputs[0], gx);
                }
                break;
            }
            case Op::kSilu: {
                const Matrix& A = node(n.inputs[0]).val;
                const Matrix& sig = n.aux;
                // d/dx x*sig(x) = sig(x) * (1 + x * (1 - sig(x)))
                Matrix deriv =
                    (sig.array() * (1.0 + A.array() * (1.0 - sig.array()))).matrix();
                add_grad(n.inputs[0], g.cwiseProduct(deriv));
                break;
            }
            case Op::kDropout:
                add_grad(n.inputs[0], g.cwiseProduct(n.aux));
                break;
            case Op::kSum:
                add_grad(n.inputs[0],
                         Matrix::Constant(node(n.inputs[0]).val.rows(),
                                          node(n.inputs[0]).val.cols(), g(0, 0)));
                break;
            case Op::kCrossEntropyCols: {
                const Node& src = node(n.inputs[0]);
                if (src.needs_grad) {
                    Matrix gl = Matrix::Zero(src.val.rows(), src.val.cols());
                    const double w = g(0, 0) / n.scalar;
                    for (Eigen::Index c = 0; c < gl.cols(); ++c) {
                        if (!n.mask[static_cast<std::size_t>(c)]) continue;
                        gl.col(c) = n.aux.col(c) * w;
                        gl(n.indices[static_cast<std::size_t>(c)], c) -= w;
                    }
                    add_grad(n.inputs[0], gl);
                }
                break;
            }
            case Op::kLeaf:
                break;
        }
        // Intermediate gradients are only needed while propagating; free
        // them eagerly so long sequences do not hold two full activations.
        if (n.op != Op::kLeaf) {
            n.grad.resize(0, 0);
            n.grad_ready = false;
        }
    }
}

void Tape::clear() {
    nodes_.clear();
    stochastic_ = false;
}

double grad_check(std::span<const Matrix> params,
                  const std::function<Value(Tape&, const std::vector<Value>&)>& build,
                  double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-2) {
        throw std::invalid_argument("grad_check: epsilon must be in (0, 1e-2]");
    }
    if (params.empty()) return 0.0;

    auto evaluate = [&](const std::vector<Matrix>& p, Tape& tape,
                        std::vector<Value>& leaves) {
        leaves.clear();
        leaves.reserve(p.size());
        for (const Matrix& m : p) leaves.push_back(tape.leaf(m, true));
        Value loss = build(tape, leaves);
        if (tape.stochastic()) {
            throw std::invalid_argument(
                "grad_check: function is stochastic (dropout enabled)");
        }
        const Matrix& v = tape.value(loss);
        if (v.rows() != 1 || v.cols() != 1) {
            throw std::invalid_argument("grad_check: function must produce a scalar");
        }
        return loss;
    };

    std::vector<Matrix> base(params.begin(), params.end());

    Tape tape;
    std::vector<Value> leaves;
    Value loss = evaluate(base, tape, leaves);
    tape.backward(loss);
    std::vector<Matrix> analytic;
    analytic.reserve(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (tape.has_grad(leaves[i])) {
            analytic.push_back(tape.grad(leaves[i]));
        } else {
            analytic.push_back(Matrix::Zero(base[i].rows(), base[i].cols()));
        }
    }

    auto value_at = [&](const std::vector<Matrix>& p) {
        Tape t;
        std::vector<Value> l;
        Value v = evaluate(p, t, l);
        return t.value(v)(0, 0);
    };

    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (Eigen::Index c = 0; c < base[i].cols(); ++c) {
            for (Eigen::Index r = 0; r < base[i].rows(); ++r) {
                const double keep = base[i](r, c);
                base[i](r, c) = keep + epsilon;
                const double up = value_at(base);
                base[i](r, c) = keep - epsilon;
                const double down = value_at(base);
                base[i](r, c) = keep;
                const double numeric = (up - down) / (2.0 * epsilon);
                const double a = analytic[i](r, c);
                const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
                worst = std::max(worst, err);
            }
        }
    }
    return worst;
}

}  // namespace letterlm
