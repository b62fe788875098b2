// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace letterlm {

void AdamW::step_group(std::map<std::string, Matrix*>& params,
                       const std::map<std::string, Matrix>& grads) {
    const long t = step_count_ + 1;  // bias correction uses the upcoming step index
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));

    for (auto& [name, param] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;  // parameter untouched this step
        const Matrix& g = git->second;
        if (!g.allFinite()) {
            throw std::runtime_error("adamw: non-finite gradient for '" + name +
                                     "' at step " + std::to_string(t));
        }
        if (g.rows() != param->rows() || g.cols() != param->cols()) {
            throw std::invalid_argument("adamw: gradient shape mismatch for '" + name + "'");
        }

        MomentPair& mp = state_[name];
        if (!mp.initialized) {
            mp.m = Matrix::Zero(param->rows(), param->cols());
            mp.v = Matrix::Zero(param->rows(), param->cols());
            mp.initialized = true;
        } else if (config_.quantized_state) {
            mp.m = dequantize(mp.mq);
            mp.v = dequantize(mp.vq);
        }

        mp.m = config_.beta1 * mp.m + (1.0 - config_.beta1) * g;
        mp.v = config_.beta2 * mp.v + (1.0 - config_.beta2) * g.cwiseProduct(g);

        Matrix m_hat = mp.m / bc1;
        Matrix v_hat = mp.v / bc2;
        Matrix update =
            m_hat.array() / (v_hat.array().sqrt() + config_.eps);
        *param -= config_.lr * (update + config_.weight_decay * (*param));

        if (config_.quantized_state) {
            mp.mq = quantize_blockwise(mp.m, 8, config_.state_block);
            mp.vq = quantize_blockwise(mp.v, 8, config_.state_block);
            mp.m.resize(0, 0);
            mp.v.resize(0, 0);
        }
    }
}

std::size_t AdamW::state_bytes_per_param(std::size_t entries) const {
    if (config_.quantized_state) {
        const std::size_t blocks =
            entries == 0 ? 0 : (entries - 1) / static_cast<std::size_t>(config_.state_block) + 1;
        return 2 * (entries + blocks * sizeof(double));
    }
    return 2 * entries * sizeof(double);
}

Matrix accumulate(const std::vector<Matrix>& micro_gradients) {
    if (micro_gradients.empty()) {
        throw std::invalid_argument("accumulate: empty micro-gradient list");
    }
    Matrix sum = micro_gradients[0];
    for (std::size_t i = 1; i < micro_gradients.size(); ++i) {
        const Matrix& g = micro_gradients[i];
        if (g.rows() != sum.rows() || g.cols() != sum.cols()) {
            throw std::invalid_argument("accumulate: micro-gradient shape mismatch");
        }
        sum += g;
    }
    return sum / static_cast<double>(micro_gradients.size());
}

std::map<std::string, Matrix> accumulate(
    const std::vector<std::map<std::string, Matrix>>& micro_gradients) {
    if (micro_gradients.empty()) {
        throw std::invalid_argument("accumulate: empty micro-gradient list");
    }
    std::map<std::string, Matrix> out;
    for (const auto& [name, g] : micro_gradients[0]) {
        std::vector<Matrix> per_param;
        per_param.reserve(micro_gradients.size());
        for (const auto& micro : micro_gradients) {
            auto it = micro.find(name);
            if (it == micro.end()) {
                throw std::invalid_argument("accumulate: parameter '" + name +
                                            "' missing from a micro-batch");
            }
            per_param.push_back(it->second);
        }
        out[name] = accumulate(per_param);
    }
    return out;
}

}  // namespace letterlm
