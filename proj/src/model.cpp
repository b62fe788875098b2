// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace letterlm {

namespace {

constexpr double kMaskNegative = -1e30;

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double std_dev) {
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = std_dev * rng.gaussian();
        }
    }
    return m;
}

void fnv_accumulate(std::uint64_t& h, const Matrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            double v = m(r, c);
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (bits >> (8 * byte)) & 0xFF;
                h *= 1099511628211ULL;
            }
        }
    }
}

}  // namespace

bool is_lora_target_name(const std::string& name) {
    return std::find(kLoraTargetNames.begin(), kLoraTargetNames.end(), name) !=
           kLoraTargetNames.end();
}

void ModelConfig::validate() const {
    if (vocab_size < Tokenizer::kNumSpecials || d_model < 1 || n_heads < 1 ||
        n_layers < 1 || d_ff < 1 || max_seq_len < 1) {
        throw std::invalid_argument("ModelConfig: all sizes must be positive");
    }
    if (d_model % n_heads != 0) {
        throw std::invalid_argument("ModelConfig: d_model " + std::to_string(d_model) +
                                    " not divisible by n_heads " + std::to_string(n_heads));
    }
    for (const std::string& t : lora_targets) {
        if (!is_lora_target_name(t)) {
            throw std::invalid_argument("ModelConfig: unknown lora target '" + t + "'");
        }
    }
}

ModelWeights init_model(const ModelConfig& config, Rng& rng, double init_std) {
    config.validate();
    ModelWeights w;
    w.config = config;
    const int d = config.d_model;
    w.tok_embed = gaussian_matrix(d, config.vocab_size, rng, init_std);
    w.pos_embed = gaussian_matrix(d, config.max_seq_len, rng, init_std);
    w.layers.resize(static_cast<std::size_t>(config.n_layers));
    for (LayerWeights& layer : w.layers) {
        layer.q_proj = gaussian_matrix(d, d, rng, init_std);
        layer.k_proj = gaussian_matrix(d, d, rng, init_std);
        layer.v_proj = gaussian_matrix(d, d, rng, init_std);
        layer.o_proj = gaussian_matrix(d, d, rng, init_std);
        layer.gate_proj = gaussian_matrix(config.d_ff, d, rng, init_std);
        layer.up_proj = gaussian_matrix(config.d_ff, d, rng, init_std);
        layer.down_proj = gaussian_matrix(d, config.d_ff, rng, init_std);
        layer.attn_norm = Matrix::Ones(d, 1);
        layer.mlp_norm = Matrix::Ones(d, 1);
    }
    w.final_norm = Matrix::Ones(d, 1);
    w.lm_head = gaussian_matrix(config.vocab_size, d, rng, init_std);
    return w;
}

std::uint64_t weights_checksum(const ModelWeights& w) {
    std::uint64_t h = 1469598103934665603ULL;
    fnv_accumulate(h, w.tok_embed);
    fnv_accumulate(h, w.pos_embed);
    for (const LayerWeights& layer : w.layers) {
        fnv_accumulate(h, layer.q_proj);
        fnv_accumulate(h, layer.k_proj);
        fnv_accumulate(h, layer.v_proj);
        fnv_accumulate(h, layer.o_proj);
        fnv_accumulate(h, layer.gate_proj);
        fnv_accumulate(h, layer.up_proj);
        fnv_accumulate(h, layer.down_proj);
        fnv_accumulate(h, layer.attn_norm);
        fnv_accumulate(h, layer.mlp_norm);
    }
    fnv_accumulate(h, w.final_norm);
    fnv_accumulate(h, w.lm_head);
    return h;
}

long AdapterSet::trainable_params() const {
    long total = 0;
    for (const auto& [name, adapter] : by_name) {
        total += adapter.A.size() + adapter.B.size();
    }
    return total;
}

std::string qualified_target(int layer, const std::string& target) {
    if (target == "lm_head") return target;
    return "layers." + std::to_string(layer) + "." + target;
}

AdapterSet init_adapters(const ModelConfig& config, int rank, double alpha,
                         double dropout, Rng& rng) {
    config.validate();
    AdapterSet set;
    auto maybe_add = [&](const std::string& target, int d_out, int d_in, int layer) {
        if (std::find(config.lora_targets.begin(), config.lora_targets.end(), target) ==
            config.lora_targets.end()) {
            return;
        }
        const std::string name = qualified_target(layer, target);
        set.by_name[name] = lora_init(d_out, d_in, rank, alpha, dropout, rng, name);
    };
    for (int layer = 0; layer < config.n_layers; ++layer) {
        maybe_add("q_proj", config.d_model, config.d_model, layer);
        maybe_add("k_proj", config.d_model, config.d_model, layer);
        maybe_add("v_proj", config.d_model, config.d_model, layer);
        maybe_add("o_proj", config.d_model, config.d_model, layer);
        maybe_add("gate_proj", config.d_ff, config.d_model, layer);
        maybe_add("up_proj", config.d_ff, config.d_model, layer);
        maybe_add("down_proj", config.d_model, config.d_ff, layer);
    }
    maybe_add("lm_head", config.vocab_size, config.d_model, 0);
    return set;
}

QuantizedBase quantize_base(const ModelWeights& w, int bit_width, int block_size) {
    QuantizedBase qb;
    qb.bit_width = bit_width;
    qb.block_size = block_size;
    for (int layer = 0; layer < w.config.n_layers; ++layer) {
        const LayerWeights& lw = w.layers[static_cast<std::size_t>(layer)];
        qb.projections[qualified_target(layer, "q_proj")] =
            quantize_blockwise(lw.q_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "k_proj")] =
            quantize_blockwise(lw.k_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "v_proj")] =
            quantize_blockwise(lw.v_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "o_proj")] =
            quantize_blockwise(lw.o_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "gate_proj")] =
            quantize_blockwise(lw.gate_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "up_proj")] =
            quantize_blockwise(lw.up_proj, bit_width, block_size);
        qb.projections[qualified_target(layer, "down_proj")] =
            quantize_blockwise(lw.down_proj, bit_width, block_size);
    }
    qb.projections["lm_head"] = quantize_blockwise(w.lm_head, bit_width, block_size);
    return qb;
}

ModelWeights apply_quantized_base(const ModelWeights& w, const QuantizedBase& qb) {
    ModelWeights out = w;
    for (int layer = 0; layer < w.config.n_layers; ++layer) {
        LayerWeights& lw = out.layers[static_cast<std::size_t>(layer)];
        lw.q_proj = dequantize(qb.projections.at(qualified_target(layer, "q_proj")));
        lw.k_proj = dequantize(qb.projections.at(qualified_target(layer, "k_proj")));
        lw.v_proj = dequantize(qb.projections.at(qualified_target(layer, "v_proj")));
        lw.o_proj = dequantize(qb.projections.at(qualified_target(layer, "o_proj")));
        lw.gate_proj = dequantize(qb.projections.at(qualified_target(layer, "gate_proj")));
        lw.up_proj = dequantize(qb.projections.at(qualified_target(layer, "up_proj")));
        lw.down_proj = dequantize(qb.projections.at(qualified_target(layer, "down_proj")));
    }
    out.lm_head = dequantize(qb.projections.at("lm_head"));
    return out;
}

namespace {

struct ForwardContext {
    Tape& tape;
    const ModelWeights& w;
    const AdapterSet* adapters;
    ModelBindings& bindings;
    TrainableSet trainable;
    bool train_mode;
    Rng* rng;

    // Pre-seeded bindings take precedence, so callers (grad checks) can
    // substitute their own leaves for any parameter.
    Value weight_leaf(const std::string& name, const Matrix& m) {
        auto it = bindings.params.find(name);
        if (it != bindings.params.end()) return it->second;
        Value v = tape.leaf(m, trainable == TrainableSet::kAll);
        bindings.params[name] = v;
        return v;
    }

    Value adapter_leaf(const std::string& key, const Matrix& m) {
        auto it = bindings.adapters.find(key);
        if (it != bindings.adapters.end()) return it->second;
        Value v = tape.leaf(m, true);
        bindings.adapters[key] = v;
        return v;
    }

    // Projection with an optional adapter on a parallel path.
    Value project(const std::string& name, const Matrix& weight, Value x) {
        Value w0 = weight_leaf(name, weight);
        const LoraAdapter* adapter = nullptr;
        if (adapters != nullptr) {
            auto it = adapters->by_name.find(name);
            if (it != adapters->by_name.end()) adapter = &it->second;
        }
        if (adapter == nullptr) return tape.matmul(w0, x);
        Value a = adapter_leaf(name + ".A", adapter->A);
        Value b = adapter_leaf(name + ".B", adapter->B);
        return lora_forward(tape, w0, a, b, *adapter, x, train_mode, rng);
    }
};

Matrix causal_mask(Eigen::Index seq) {
    Matrix m = Matrix::Zero(seq, seq);
    for (Eigen::Index i = 0; i < seq; ++i) {
        for (Eigen::Index j = i + 1; j < seq; ++j) {
            m(i, j) = kMaskNegative;
        }
    }
    return m;
}

}  // namespace

Value model_forward(Tape& tape, const ModelWeights& w, const AdapterSet* adapters,
                    ModelBindings& bindings, const std::vector<int>& ids,
                    TrainableSet trainable, bool train_mode, Rng* rng) {
    const ModelConfig& cfg = w.config;
    const auto seq = static_cast<Eigen::Index>(ids.size());
    if (seq == 0) {
        throw std::invalid_argument("model_forward: empty id sequence");
    }
    if (seq > cfg.max_seq_len) {
        throw std::invalid_argument("model_forward: sequence length " +
                                    std::to_string(seq) + " exceeds the token budget (max " +
                                    std::to_string(cfg.max_seq_len) + " tokens)");
    }
    for (int id : ids) {
        if (id < 0 || id >= cfg.vocab_size) {
            throw std::invalid_argument("model_forward: token id out of range");
        }
    }

    ForwardContext ctx{tape, w, adapters, bindings, trainable, train_mode, rng};

    Value tok = ctx.weight_leaf("tok_embed", w.tok_embed);
    Value pos = ctx.weight_leaf("pos_embed", w.pos_embed);
    std::vector<int> positions(ids.size());
    std::iota(positions.begin(), positions.end(), 0);
    Value x = tape.add(tape.gather_cols(tok, ids), tape.gather_cols(pos, positions));

    Value mask = tape.constant(causal_mask(seq));
    const int dh = cfg.head_dim();
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    for (int layer = 0; layer < cfg.n_layers; ++layer) {
        const LayerWeights& lw = w.layers[static_cast<std::size_t>(layer)];
        const std::string prefix = "layers." + std::to_string(layer) + ".";

        Value attn_gain = ctx.weight_leaf(prefix + "attn_norm", lw.attn_norm);
        Value normed = tape.rmsnorm_cols(x, attn_gain);
        Value q = ctx.project(prefix + "q_proj", lw.q_proj, normed);
        Value k = ctx.project(prefix + "k_proj", lw.k_proj, normed);
        Value v = ctx.project(prefix + "v_proj", lw.v_proj, normed);

        std::vector<Value> heads;
        heads.reserve(static_cast<std::size_t>(cfg.n_heads));
        for (int h = 0; h < cfg.n_heads; ++h) {
            Value qh = tape.middle_rows(q, h * dh, dh);
            Value kh = tape.middle_rows(k, h * dh, dh);
            Value vh = tape.middle_rows(v, h * dh, dh);
            Value scores = tape.scale(tape.matmul(tape.transpose(qh), kh), attn_scale);
            Value probs = tape.softmax_rows(tape.add(scores, mask));
            heads.push_back(tape.matmul(vh, tape.transpose(probs)));
        }
        Value attn = heads.size() == 1 ? heads[0] : tape.vstack(heads);
        x = tape.add(x, ctx.project(prefix + "o_proj", lw.o_proj, attn));

        Value mlp_gain = ctx.weight_leaf(prefix + "mlp_norm", lw.mlp_norm);
        Value mlp_in = tape.rmsnorm_cols(x, mlp_gain);
        Value gate = tape.silu(ctx.project(prefix + "gate_proj", lw.gate_proj, mlp_in));
        Value up = ctx.project(prefix + "up_proj", lw.up_proj, mlp_in);
        Value mlp = ctx.project(prefix + "down_proj", lw.down_proj, tape.hadamard(gate, up));
        x = tape.add(x, mlp);
    }

    Value final_gain = ctx.weight_leaf("final_norm", w.final_norm);
    Value y = tape.rmsnorm_cols(x, final_gain);
    return ctx.project("lm_head", w.lm_head, y);
}

Matrix model_logits(const ModelWeights& w, const AdapterSet* adapters,
                    const std::vector<int>& ids) {
    Tape tape;
    ModelBindings bindings;
    Value logits = model_forward(tape, w, adapters, bindings, ids,
                                 TrainableSet::kAdaptersOnly, false, nullptr);
    return tape.value(logits);
}

std::vector<int> generate(const ModelWeights& w, const AdapterSet* adapters,
                          const std::vector<int>& prompt_ids, int max_new) {
    if (prompt_ids.empty()) {
        throw std::invalid_argument("generate: empty prompt");
    }
    std::vector<int> ids = prompt_ids;
    std::vector<int> fresh;
    for (int step = 0; step < max_new; ++step) {
        if (static_cast<int>(ids.size()) >= w.config.max_seq_len) break;
        Matrix logits = model_logits(w, adapters, ids);
        Eigen::Index best = 0;
        logits.col(logits.cols() - 1).maxCoeff(&best);  // first maximal index
        const int next = static_cast<int>(best);
        if (next == Tokenizer::kEos) break;
        ids.push_back(next);
        fresh.push_back(next);
    }
    return fresh;
}

}  // namespace letterlm
