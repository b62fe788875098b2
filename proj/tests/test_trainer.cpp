// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "letterlm/trainer.hpp"

using namespace letterlm;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.vocab_size = 32;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.n_layers = 2;
    cfg.d_ff = 32;
    cfg.max_seq_len = 16;
    return cfg;
}

TokenizedExample example_of(std::vector<int> ids, std::size_t prompt_len,
                            std::string name) {
    return TokenizedExample{std::move(ids), prompt_len, std::move(name)};
}

std::vector<TokenizedExample> toy_dataset() {
    return {
        example_of({0, 5, 6, 7, 8, 9, 1}, 3, "a"),
        example_of({0, 5, 6, 10, 11, 12, 1}, 3, "b"),
        example_of({0, 7, 8, 13, 14, 15, 1}, 3, "c"),
        example_of({0, 9, 10, 16, 17, 18, 1}, 3, "d"),
    };
}

bool adapters_equal(const AdapterSet& a, const AdapterSet& b) {
    if (a.by_name.size() != b.by_name.size()) return false;
    for (const auto& [name, adapter] : a.by_name) {
        auto it = b.by_name.find(name);
        if (it == b.by_name.end()) return false;
        if (adapter.A != it->second.A || adapter.B != it->second.B) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("adamw: zero gradient with zero weight decay leaves parameters alone") {
    AdamW opt(AdamWConfig{.lr = 0.1});
    Matrix p = Matrix::Ones(2, 2);
    std::map<std::string, Matrix*> params{{"p", &p}};
    std::map<std::string, Matrix> grads{{"p", Matrix::Zero(2, 2)}};
    opt.step_group(params, grads);
    CHECK(p == Matrix::Ones(2, 2));
}

TEST_CASE("adamw: first-step update magnitude is about lr") {
    AdamW opt(AdamWConfig{.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8,
                          .weight_decay = 0.0});
    Matrix p = Matrix::Zero(1, 1);
    std::map<std::string, Matrix*> params{{"p", &p}};
    std::map<std::string, Matrix> grads{{"p", Matrix::Ones(1, 1)}};
    opt.step_group(params, grads);
    opt.bump_step();
    CHECK(p(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adamw rejects NaN gradients with the step index") {
    AdamW opt(AdamWConfig{.lr = 0.1});
    Matrix p = Matrix::Zero(1, 1);
    Matrix bad = Matrix::Constant(1, 1, std::numeric_limits<double>::quiet_NaN());
    std::map<std::string, Matrix*> params{{"p", &p}};
    std::map<std::string, Matrix> grads{{"p", bad}};
    CHECK_THROWS_WITH_AS(opt.step_group(params, grads), doctest::Contains("step 1"),
                         std::runtime_error);
}

TEST_CASE("8-bit optimizer state tracks full precision on a quadratic") {
    auto run = [](bool quantized) {
        AdamWConfig cfg;
        cfg.lr = 0.01;
        cfg.quantized_state = quantized;
        AdamW opt(cfg);
        Matrix p(4, 4);
        for (Eigen::Index i = 0; i < 16; ++i) {
            p(i / 4, i % 4) = 0.5 + 0.2 * static_cast<double>(i);
        }
        std::map<std::string, Matrix*> params{{"p", &p}};
        for (int step = 0; step < 100; ++step) {
            std::map<std::string, Matrix> grads{{"p", 2.0 * p}};  // d/dp ||p||^2
            opt.step_group(params, grads);
            opt.bump_step();
        }
        return p.squaredNorm();
    };
    const double full = run(false);
    const double eight_bit = run(true);
    CHECK(std::abs(full - eight_bit) / std::max(full, 1e-12) < 0.05);
}

TEST_CASE("accumulate basics and linearity") {
    CHECK_THROWS_AS(accumulate(std::vector<Matrix>{}), std::invalid_argument);

    Matrix g = Matrix::Constant(2, 2, 3.0);
    CHECK(accumulate({g}) == g);
    CHECK(accumulate({g, g}) == g);

    // Mean of per-example gradients equals the gradient of the mean loss.
    Matrix g1 = Matrix::Random(3, 3);
    Matrix g2 = Matrix::Random(3, 3);
    Matrix mean = accumulate({g1, g2});
    CHECK(((g1 + g2) / 2.0 - mean).cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(accumulate({g1, Matrix::Zero(2, 2)}), std::invalid_argument);
}

TEST_CASE("pager: hand-simulated two-group thrash at minimal capacity") {
    ResidencyManager pager;
    pager.register_group("g1", 100);
    pager.register_group("g2", 80);
    MemoryBudget budget;
    budget.capacity = 100;

    for (long step = 1; step <= 3; ++step) {
        pager.require("g1", budget, step);
        CHECK(budget.usage <= budget.capacity);
        pager.require("g2", budget, step);
        CHECK(budget.usage <= budget.capacity);
    }
    // First touch restores without an eviction; every later touch evicts
    // the other group and restores the needed one.
    CHECK(budget.restore_count() == 6);
    CHECK(budget.offload_count() == 5);
    CHECK(budget.peak == 100);
}

TEST_CASE("pager: capacity above the total produces no offloads") {
    ResidencyManager pager;
    pager.register_group("g1", 100);
    pager.register_group("g2", 80);
    MemoryBudget budget;
    budget.capacity = 200;
    for (long step = 1; step <= 5; ++step) {
        pager.require("g1", budget, step);
        pager.require("g2", budget, step);
    }
    CHECK(budget.offload_count() == 0);
    CHECK(budget.restore_count() == 2);  // one initial load each
    CHECK(budget.peak == 180);
}

TEST_CASE("pager rejects a group larger than the capacity, naming sizes") {
    ResidencyManager pager;
    pager.register_group("big", 1000);
    MemoryBudget budget;
    budget.capacity = 10;
    CHECK_THROWS_WITH_AS(pager.require("big", budget, 1), doctest::Contains("1000"),
                         std::invalid_argument);
}

TEST_CASE("train rejects bad configs and bad datasets") {
    Rng rng(51);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.total_steps = 1;
    MemoryBudget budget;

    CHECK_THROWS_AS(train(w, {}, cfg, budget), std::invalid_argument);

    TrainConfig negative = cfg;
    negative.learning_rate = -1.0;
    CHECK_THROWS_AS(train(w, toy_dataset(), negative, budget), std::invalid_argument);

    TrainConfig small = cfg;
    small.max_tokens = 5;
    CHECK_THROWS_WITH_AS(train(w, toy_dataset(), small, budget), doctest::Contains("'a'"),
                         std::invalid_argument);
}

TEST_CASE("lr=0 run leaves all weights exactly at initialization") {
    Rng rng(52);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.total_steps = 3;
    cfg.micro_batch = 1;
    cfg.accumulation_steps = 1;
    cfg.max_tokens = 16;
    cfg.lora_rank = 2;
    cfg.lora_dropout = 0.0;
    MemoryBudget budget;
    TrainOutput out = train(w, toy_dataset(), cfg, budget);
    CHECK(weights_checksum(out.model) == weights_checksum(w));
    for (const auto& [name, adapter] : out.adapters.by_name) {
        CHECK(adapter.B == Matrix::Zero(adapter.B.rows(), adapter.B.cols()));
    }
}

TEST_CASE("same seed gives bit-identical outcomes") {
    Rng rng(53);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.total_steps = 5;
    cfg.max_tokens = 16;
    cfg.lora_rank = 2;
    cfg.seed = 99;
    MemoryBudget b1, b2;
    TrainOutput first = train(w, toy_dataset(), cfg, b1);
    TrainOutput second = train(w, toy_dataset(), cfg, b2);
    CHECK(adapters_equal(first.adapters, second.adapters));
    CHECK(weights_checksum(first.model) == weights_checksum(second.model));
}

TEST_CASE("accumulation equivalence on the first step") {
    Rng rng(54);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig base;
    base.learning_rate = 1e-3;
    base.total_steps = 1;
    base.max_tokens = 16;
    base.lora_rank = 2;
    base.lora_dropout = 0.0;
    base.seed = 7;

    TrainConfig split = base;
    split.micro_batch = 1;
    split.accumulation_steps = 2;
    TrainConfig batched = base;
    batched.micro_batch = 2;
    batched.accumulation_steps = 1;

    MemoryBudget b1, b2;
    TrainOutput a = train(w, toy_dataset(), split, b1);
    TrainOutput b = train(w, toy_dataset(), batched, b2);
    for (const auto& [name, adapter] : a.adapters.by_name) {
        const LoraAdapter& other = b.adapters.by_name.at(name);
        CHECK((adapter.A - other.A).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((adapter.B - other.B).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("paging is invisible to training results") {
    Rng rng(55);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.total_steps = 10;
    cfg.max_tokens = 16;
    cfg.lora_rank = 2;
    cfg.seed = 13;

    MemoryBudget unbounded;
    TrainOutput reference = train(w, toy_dataset(), cfg, unbounded);
    REQUIRE(reference.largest_group_bytes > 0);

    MemoryBudget twice;
    twice.capacity = 2 * reference.largest_group_bytes;
    TrainOutput mid = train(w, toy_dataset(), cfg, twice);

    MemoryBudget tight;
    tight.capacity = reference.largest_group_bytes;
    TrainOutput low = train(w, toy_dataset(), cfg, tight);

    CHECK(adapters_equal(reference.adapters, mid.adapters));
    CHECK(adapters_equal(reference.adapters, low.adapters));
    CHECK(reference.budget.events.size() < mid.budget.events.size());
    CHECK(mid.budget.events.size() < low.budget.events.size());
}

TEST_CASE("only adapters move during a LoRA run; loss falls when overfitting") {
    Rng rng(56);
    ModelWeights w = init_model(tiny_config(), rng);
    const std::uint64_t base_before = weights_checksum(w);

    std::vector<TokenizedExample> one{
        example_of({0, 5, 6, 7, 8, 9, 10, 11, 1}, 3, "single")};
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.total_steps = 500;
    cfg.micro_batch = 1;
    cfg.accumulation_steps = 1;
    cfg.max_tokens = 16;
    cfg.use_lora = false;  // full-parameter memorization of one sequence
    MemoryBudget budget;
    TrainOutput out = train(w, one, cfg, budget);

    REQUIRE(out.metrics.size() == 500);
    std::vector<double> window_means;
    for (std::size_t at = 0; at < 500; at += 50) {
        double sum = 0.0;
        for (std::size_t i = at; i < at + 50; ++i) sum += out.metrics[i].loss;
        window_means.push_back(sum / 50.0);
    }
    for (std::size_t i = 1; i < window_means.size(); ++i) {
        CHECK(window_means[i] < window_means[i - 1]);
    }
    CHECK(out.metrics.back().loss < 0.1 * out.metrics.front().loss);
    CHECK(weights_checksum(w) == base_before);  // input model untouched
}

TEST_CASE("quantized base: codes never change across a training run") {
    Rng rng(57);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.total_steps = 5;
    cfg.max_tokens = 16;
    cfg.lora_rank = 2;
    cfg.quantize_base = true;
    cfg.base_bits = 8;
    MemoryBudget budget;
    TrainOutput out = train(w, toy_dataset(), cfg, budget);
    REQUIRE(out.quantized_base.has_value());

    const QuantizedBase fresh = quantize_base(w, cfg.base_bits, cfg.base_block);
    for (const auto& [name, q] : fresh.projections) {
        const QuantizedMatrix& after = out.quantized_base->projections.at(name);
        CHECK(after.codes == q.codes);
        CHECK(after.scales == q.scales);
    }
}

TEST_CASE("metrics csv carries the five columns in order") {
    std::vector<StepMetrics> ms{{1, 0.5, 100, 2, 3.25}};
    const std::string csv = metrics_csv(ms);
    CHECK(csv.rfind("step,loss,fast_pool_bytes,offload_events,elapsed_ms\n", 0) == 0);
    CHECK(csv.find("1,0.5,100,2,3.25") != std::string::npos);
}

TEST_CASE("peak fast-pool usage equals the analytic resident-set maximum") {
    Rng rng(58);
    ModelWeights w = init_model(tiny_config(), rng);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.total_steps = 4;
    cfg.max_tokens = 16;
    cfg.lora_rank = 2;
    MemoryBudget budget;
    budget.capacity = 2 * 17408;  // two layer groups, head forces churn
    TrainOutput out = train(w, toy_dataset(), cfg, budget);

    // Replay the event log and recompute the running resident-set size.
    std::size_t usage = 0, peak = 0;
    for (const OffloadEvent& e : out.budget.events) {
        if (e.kind == OffloadEvent::Kind::kRestore) {
            usage += e.bytes;
        } else {
            usage -= e.bytes;
        }
        peak = std::max(peak, usage);
    }
    CHECK(peak == out.budget.peak);
    CHECK(out.metrics.back().fast_pool_bytes == peak);
}
