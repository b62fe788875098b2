// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/trainer.hpp"

#include <chrono>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace letterlm {

namespace {

// Group names: "layers.N" per layer, "embed" and "head" for the rest.
std::string group_of(const std::string& param_name) {
    if (param_name.rfind("layers.", 0) == 0) {
        const std::size_t dot = param_name.find('.', 7);
        return param_name.substr(0, dot);
    }
    if (param_name == "tok_embed" || param_name == "pos_embed") return "embed";
    return "head";
}

struct ParamTable {
    std::map<std::string, Matrix*> params;             // name -> storage
    std::map<std::string, std::vector<std::string>> groups;  // group -> names
};

ParamTable collect_trainable(ModelWeights& model, AdapterSet& adapters, bool use_lora) {
    ParamTable table;
    auto put = [&table](const std::string& name, Matrix* m) {
        table.params[name] = m;
        table.groups[group_of(name)].push_back(name);
    };
    if (use_lora) {
        for (auto& [name, adapter] : adapters.by_name) {
            put(name + ".A", &adapter.A);
            put(name + ".B", &adapter.B);
        }
        return table;
    }
    put("tok_embed", &model.tok_embed);
    put("pos_embed", &model.pos_embed);
    for (int layer = 0; layer < model.config.n_layers; ++layer) {
        LayerWeights& lw = model.layers[static_cast<std::size_t>(layer)];
        const std::string prefix = "layers." + std::to_string(layer) + ".";
        put(prefix + "q_proj", &lw.q_proj);
        put(prefix + "k_proj", &lw.k_proj);
        put(prefix + "v_proj", &lw.v_proj);
        put(prefix + "o_proj", &lw.o_proj);
        put(prefix + "gate_proj", &lw.gate_proj);
        put(prefix + "up_proj", &lw.up_proj);
        put(prefix + "down_proj", &lw.down_proj);
        put(prefix + "attn_norm", &lw.attn_norm);
        put(prefix + "mlp_norm", &lw.mlp_norm);
    }
    put("final_norm", &model.final_norm);
    put("lm_head", &model.lm_head);
    return table;
}

}  // namespace

void TrainConfig::validate() const {
    if (micro_batch < 1 || accumulation_steps < 1 || total_steps < 1 || max_tokens < 1) {
        throw std::invalid_argument("TrainConfig: all counts must be >= 1");
    }
    if (learning_rate < 0.0) {
        throw std::invalid_argument("TrainConfig: learning rate must be non-negative");
    }
    if (use_lora && lora_rank < 1) {
        throw std::invalid_argument("TrainConfig: lora rank must be >= 1");
    }
}

std::size_t group_footprint_bytes(std::size_t entries, bool quantized_state,
                                  int state_block) {
    std::size_t state;
    if (quantized_state) {
        const std::size_t blocks =
            entries == 0 ? 0 : (entries - 1) / static_cast<std::size_t>(state_block) + 1;
        state = 2 * (entries + blocks * sizeof(double));
    } else {
        state = 2 * entries * sizeof(double);
    }
    // parameters + gradients + moments; activations are not counted
    return entries * sizeof(double) + entries * sizeof(double) + state;
}

TrainOutput train(const ModelWeights& initial, const std::vector<TokenizedExample>& dataset,
                  const TrainConfig& config, MemoryBudget budget,
                  const AdapterSet* initial_adapters) {
    config.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    for (const TokenizedExample& ex : dataset) {
        if (static_cast<int>(ex.ids.size()) > config.max_tokens) {
            throw std::invalid_argument("train: example '" + ex.source_id + "' has " +
                                        std::to_string(ex.ids.size()) +
                                        " tokens, over the budget of " +
                                        std::to_string(config.max_tokens));
        }
        if (static_cast<int>(ex.ids.size()) - 1 > initial.config.max_seq_len) {
            throw std::invalid_argument("train: example '" + ex.source_id +
                                        "' exceeds the model context of " +
                                        std::to_string(initial.config.max_seq_len));
        }
        if (ex.ids.size() < 2 || ex.prompt_len < 1 || ex.prompt_len >= ex.ids.size()) {
            throw std::invalid_argument("train: example '" + ex.source_id +
                                        "' has no completion tokens");
        }
    }

    TrainOutput out;
    out.model = initial;
    if (config.quantize_base) {
        out.quantized_base = quantize_base(initial, config.base_bits, config.base_block);
        out.model = apply_quantized_base(out.model, *out.quantized_base);
    }
    if (config.use_lora) {
        if (initial_adapters != nullptr) {
            out.adapters = *initial_adapters;
        } else {
            Rng adapter_rng(config.seed + 17);
            out.adapters = init_adapters(out.model.config, config.lora_rank,
                                         config.lora_alpha, config.lora_dropout,
                                         adapter_rng);
        }
    }

    ParamTable table = collect_trainable(out.model, out.adapters, config.use_lora);

    AdamWConfig opt_config;
    opt_config.lr = config.learning_rate;
    opt_config.beta1 = config.beta1;
    opt_config.beta2 = config.beta2;
    opt_config.eps = config.adam_eps;
    opt_config.weight_decay = config.weight_decay;
    opt_config.quantized_state = config.quantized_optim_state;
    AdamW optimizer(opt_config);

    ResidencyManager pager;
    for (const auto& [group, names] : table.groups) {
        std::size_t entries = 0;
        for (const std::string& name : names) {
            entries += static_cast<std::size_t>(table.params.at(name)->size());
        }
        pager.register_group(group,
                             group_footprint_bytes(entries, config.quantized_optim_state,
                                                   opt_config.state_block));
    }
    out.largest_group_bytes = pager.largest_group_bytes();
    out.total_group_bytes = pager.total_bytes();

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng data_rng(config.seed + 1);
    data_rng.shuffle(order);
    std::size_t cursor = 0;
    auto next_example = [&]() -> const TokenizedExample& {
        if (cursor == order.size()) {
            data_rng.shuffle(order);
            cursor = 0;
        }
        return dataset[order[cursor++]];
    };

    Rng dropout_rng(config.seed + 2);
    const TrainableSet trainable_set =
        config.use_lora ? TrainableSet::kAdaptersOnly : TrainableSet::kAll;

    out.metrics.reserve(static_cast<std::size_t>(config.total_steps));
    for (long step = 1; step <= config.total_steps; ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t events_before = budget.events.size();

        std::vector<std::map<std::string, Matrix>> micro_grads;
        micro_grads.reserve(static_cast<std::size_t>(config.accumulation_steps));
        double step_loss = 0.0;

        for (int acc = 0; acc < config.accumulation_steps; ++acc) {
            std::vector<std::map<std::string, Matrix>> example_grads;
            example_grads.reserve(static_cast<std::size_t>(config.micro_batch));
            for (int b = 0; b < config.micro_batch; ++b) {
                const TokenizedExample& ex = next_example();
                const std::size_t n = ex.ids.size();
                std::vector<int> inputs(ex.ids.begin(), ex.ids.end() - 1);
                std::vector<int> targets(ex.ids.begin() + 1, ex.ids.end());
                std::vector<std::uint8_t> mask(n - 1, 0);
                for (std::size_t t = ex.prompt_len - 1; t < n - 1; ++t) mask[t] = 1;

                Tape tape;
                ModelBindings bindings;
                Value logits =
                    model_forward(tape, out.model, config.use_lora ? &out.adapters : nullptr,
                                  bindings, inputs, trainable_set,
                                  /*train_mode=*/true, &dropout_rng);
                Value loss = tape.cross_entropy_cols(logits, targets, mask);
                step_loss += tape.value(loss)(0, 0);
                tape.backward(loss);

                std::map<std::string, Matrix> grads;
                const auto& leaf_map =
                    config.use_lora ? bindings.adapters : bindings.params;
                for (const auto& [name, leaf] : leaf_map) {
                    if (tape.has_grad(leaf)) grads[name] = tape.grad(leaf);
                }
                example_grads.push_back(std::move(grads));
            }
            micro_grads.push_back(accumulate(example_grads));
        }

        std::map<std::string, Matrix> grads = accumulate(micro_grads);
        step_loss /= static_cast<double>(config.accumulation_steps * config.micro_batch);

        for (const auto& [group, names] : table.groups) {
            bool touched = false;
            for (const std::string& name : names) {
                if (grads.count(name) != 0) {
                    touched = true;
                    break;
                }
            }
            if (!touched) continue;
            pager.require(group, budget, step);
            std::map<std::string, Matrix*> group_params;
            for (const std::string& name : names) group_params[name] = table.params.at(name);
            try {
                optimizer.step_group(group_params, grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " (training step " +
                                         std::to_string(step) + ")");
            }
        }
        optimizer.bump_step();

        const auto t1 = std::chrono::steady_clock::now();
        StepMetrics m;
        m.step = step;
        m.loss = step_loss;
        m.fast_pool_bytes = budget.peak;
        m.offload_events = budget.events.size() - events_before;
        m.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        out.metrics.push_back(m);
    }

    out.budget = budget;
    return out;
}

std::string metrics_csv(const std::vector<StepMetrics>& metrics) {
    std::ostringstream os;
    os << "step,loss,fast_pool_bytes,offload_events,elapsed_ms\n";
    for (const StepMetrics& m : metrics) {
        os << m.step << ',' << m.loss << ',' << m.fast_pool_bytes << ','
           << m.offload_events << ',' << m.elapsed_ms << '\n';
    }
    return os.str();
}

}  // namespace letterlm
