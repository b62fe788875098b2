// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "letterlm/checkpoint.hpp"
#include "letterlm/evalrun.hpp"
#include "letterlm/ratings.hpp"
#include "letterlm/synth.hpp"

namespace letterlm::cli {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A run directory owns exactly one manifest; a second run must use a
// fresh directory.
struct ManifestScope {
    std::filesystem::path dir;
    nlohmann::json body;

    ManifestScope(std::filesystem::path run_dir, const std::string& subcommand)
        : dir(std::move(run_dir)) {
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(dir / "manifest.json")) {
            throw std::invalid_argument("run directory '" + dir.string() +
                                        "' already contains a manifest; use a fresh "
                                        "directory");
        }
        body["tool"] = "letterlm";
        body["version"] = kToolVersion;
        body["subcommand"] = subcommand;
        body["started_at"] = timestamp_utc();
    }

    void finish() {
        body["finished_at"] = timestamp_utc();
        write_text(dir / "manifest.json", body.dump(2) + "\n");
    }
};

std::filesystem::path resolve_out(std::string out, const std::string& subcommand) {
    if (!out.empty()) return out;
    const char* root = std::getenv("LETTERLM_RUN_ROOT");
    if (root == nullptr) {
        throw std::invalid_argument("--out not given and LETTERLM_RUN_ROOT not set");
    }
    return std::filesystem::path(root) / subcommand;
}

nlohmann::json train_config_json(const TrainConfig& t, const ModelConfig& m) {
    return nlohmann::json{{"learning_rate", t.learning_rate},
                          {"micro_batch", t.micro_batch},
                          {"accumulation_steps", t.accumulation_steps},
                          {"total_steps", t.total_steps},
                          {"max_tokens", t.max_tokens},
                          {"seed", t.seed},
                          {"use_lora", t.use_lora},
                          {"lora_rank", t.lora_rank},
                          {"lora_alpha", t.lora_alpha},
                          {"lora_dropout", t.lora_dropout},
                          {"quantize_base", t.quantize_base},
                          {"base_bits", t.base_bits},
                          {"base_block", t.base_block},
                          {"quantized_optim_state", t.quantized_optim_state},
                          {"beta1", t.beta1},
                          {"beta2", t.beta2},
                          {"adam_eps", t.adam_eps},
                          {"weight_decay", t.weight_decay},
                          {"vocab_size", m.vocab_size},
                          {"d_model", m.d_model},
                          {"n_heads", m.n_heads},
                          {"n_layers", m.n_layers},
                          {"d_ff", m.d_ff},
                          {"max_seq_len", m.max_seq_len}};
}

}  // namespace

RunSettings load_run_settings(const std::filesystem::path& config_file) {
    RunSettings s;
    std::istringstream in(read_text(config_file));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key=value at line " +
                                        std::to_string(line_no));
        }
        auto strip = [](std::string v) {
            const std::size_t b = v.find_first_not_of(" \t\r");
            const std::size_t e = v.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            if (key == "learning_rate") s.train.learning_rate = std::stod(value);
            else if (key == "micro_batch") s.train.micro_batch = std::stoi(value);
            else if (key == "accumulation_steps") s.train.accumulation_steps = std::stoi(value);
            else if (key == "total_steps") s.train.total_steps = std::stol(value);
            else if (key == "max_tokens") s.train.max_tokens = std::stoi(value);
            else if (key == "seed") s.train.seed = std::stoull(value);
            else if (key == "use_lora") s.train.use_lora = value == "true" || value == "1";
            else if (key == "lora_rank") s.train.lora_rank = std::stoi(value);
            else if (key == "lora_alpha") s.train.lora_alpha = std::stod(value);
            else if (key == "lora_dropout") s.train.lora_dropout = std::stod(value);
            else if (key == "quantize_base") s.train.quantize_base = value == "true" || value == "1";
            else if (key == "base_bits") s.train.base_bits = std::stoi(value);
            else if (key == "base_block") s.train.base_block = std::stoi(value);
            else if (key == "quantized_optim_state") s.train.quantized_optim_state = value == "true" || value == "1";
            else if (key == "beta1") s.train.beta1 = std::stod(value);
            else if (key == "beta2") s.train.beta2 = std::stod(value);
            else if (key == "adam_eps") s.train.adam_eps = std::stod(value);
            else if (key == "weight_decay") s.train.weight_decay = std::stod(value);
            else if (key == "vocab_size") s.model.vocab_size = std::stoi(value);
            else if (key == "d_model") s.model.d_model = std::stoi(value);
            else if (key == "n_heads") s.model.n_heads = std::stoi(value);
            else if (key == "n_layers") s.model.n_layers = std::stoi(value);
            else if (key == "d_ff") s.model.d_ff = std::stoi(value);
            else if (key == "max_seq_len") s.model.max_seq_len = std::stoi(value);
            else {
                throw std::invalid_argument("config: unknown key '" + key + "' at line " +
                                            std::to_string(line_no));
            }
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad value for '" + key + "' at line " +
                                        std::to_string(line_no));
        }
    }
    return s;
}

std::vector<std::string> read_corpus(const std::filesystem::path& input) {
    std::vector<std::string> letters;
    if (std::filesystem::is_directory(input)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(input)) {
            if (entry.path().extension() == ".txt") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) letters.push_back(read_text(f));
        if (letters.empty()) {
            throw std::invalid_argument("no .txt letters under '" + input.string() + "'");
        }
        return letters;
    }
    std::istringstream in(read_text(input));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("raw") || !j["raw"].is_string()) {
            throw std::invalid_argument("corpus: expected {\"raw\": ...} at line " +
                                        std::to_string(line_no));
        }
        letters.push_back(j["raw"].get<std::string>());
    }
    if (letters.empty()) {
        throw std::invalid_argument("corpus '" + input.string() + "' is empty");
    }
    return letters;
}

void write_corpus_jsonl(const std::filesystem::path& path,
                        const std::vector<std::string>& letters) {
    std::ostringstream out;
    for (const std::string& raw : letters) {
        out << nlohmann::json{{"raw", raw}}.dump() << '\n';
    }
    write_text(path, out.str());
}

std::vector<TrainingExample> read_examples_jsonl(const std::filesystem::path& path) {
    std::vector<TrainingExample> examples;
    std::istringstream in(read_text(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("prompt") || !j.contains("completion")) {
            throw std::invalid_argument(
                "examples: expected {prompt, completion, token_count} at line " +
                std::to_string(line_no));
        }
        TrainingExample ex;
        ex.prompt = j["prompt"].get<std::string>();
        ex.completion = j["completion"].get<std::string>();
        ex.token_count = j.value("token_count", -1L);
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) {
        throw std::invalid_argument("examples file '" + path.string() + "' is empty");
    }
    return examples;
}

void write_examples_jsonl(const std::filesystem::path& path,
                          const std::vector<TrainingExample>& examples) {
    std::ostringstream out;
    for (const TrainingExample& ex : examples) {
        out << nlohmann::json{{"prompt", ex.prompt},
                              {"completion", ex.completion},
                              {"token_count", ex.token_count}}
                   .dump()
            << '\n';
    }
    write_text(path, out.str());
}

void save_tokenizer(const std::filesystem::path& path, const Tokenizer& tk) {
    nlohmann::json j;
    j["tokens"] = tk.id_to_token;
    write_text(path, j.dump() + "\n");
}

Tokenizer load_tokenizer(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text(path));
    Tokenizer tk;
    tk.id_to_token = j.at("tokens").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < tk.id_to_token.size(); ++i) {
        tk.token_to_id[tk.id_to_token[i]] = static_cast<int>(i);
    }
    return tk;
}

namespace {

std::vector<TokenizedExample> tokenize_examples(const std::vector<TrainingExample>& raw,
                                                const Tokenizer& tk) {
    std::vector<TokenizedExample> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        TokenizedExample ex;
        ex.source_id = "example" + std::to_string(i + 1);
        ex.ids.push_back(Tokenizer::kBos);
        for (int id : encode(tk, raw[i].prompt)) ex.ids.push_back(id);
        ex.prompt_len = ex.ids.size();
        for (int id : encode(tk, raw[i].completion)) ex.ids.push_back(id);
        ex.ids.push_back(Tokenizer::kEos);
        out.push_back(std::move(ex));
    }
    return out;
}

int run_synth(std::uint64_t seed, int n, const std::string& out_file) {
    write_corpus_jsonl(out_file, generate_synthetic_corpus(seed, n));
    return 0;
}

int run_prepare(const std::string& input, const std::string& out, const std::string& task,
                bool do_anonymize, long shift_days, int max_tokens, int vocab_size,
                std::ostream& err) {
    const Task task_kind = task == "summary" ? Task::kSummary : Task::kLetter;
    ManifestScope manifest(resolve_out(out, "prepare"), "prepare");
    manifest.body["inputs"] = {input};
    manifest.body["task"] = task;
    manifest.body["anonymize"] = do_anonymize;
    manifest.body["shift_days"] = shift_days;
    manifest.body["max_tokens"] = max_tokens;
    manifest.body["vocab_size"] = vocab_size;

    std::vector<LetterRecord> records;
    for (const std::string& raw : read_corpus(input)) {
        LetterRecord rec = parse_letter(raw);
        if (do_anonymize || task_kind == Task::kSummary) {
            const AnonymizePolicy policy = task_kind == Task::kSummary
                                               ? AnonymizePolicy::kSummary
                                               : AnonymizePolicy::kDisplay;
            rec = anonymize(rec, policy, shift_days);
        }
        records.push_back(std::move(rec));
    }

    std::vector<TrainingExample> examples;
    std::vector<std::string> texts;
    for (const LetterRecord& rec : records) {
        examples.push_back(format_example(rec, task_kind));
        texts.push_back(examples.back().prompt + "\n" + examples.back().completion);
    }
    const Tokenizer tk = build_vocab(texts, vocab_size);
    for (TrainingExample& ex : examples) {
        ex = truncate_to_budget(ex, tk, max_tokens);
    }

    write_examples_jsonl(manifest.dir / "examples.jsonl", examples);
    save_tokenizer(manifest.dir / "tokenizer.json", tk);
    manifest.body["outputs"] = {"examples.jsonl", "tokenizer.json"};
    manifest.body["examples"] = examples.size();
    manifest.finish();
    err << "prepared " << examples.size() << " examples under " << manifest.dir
        << "\n";
    return 0;
}

int run_train(const std::string& data, const std::string& tokenizer_file,
              const std::string& out, RunSettings settings, std::size_t budget_bytes,
              std::ostream& err) {
    ManifestScope manifest(resolve_out(out, "train"), "train");
    const Tokenizer tk = load_tokenizer(tokenizer_file);
    settings.model.vocab_size = tk.size();

    const std::vector<TokenizedExample> dataset =
        tokenize_examples(read_examples_jsonl(data), tk);

    Rng init_rng(settings.train.seed);
    const ModelWeights initial = init_model(settings.model, init_rng);

    MemoryBudget budget;
    if (budget_bytes > 0) budget.capacity = budget_bytes;

    manifest.body["seed"] = settings.train.seed;
    manifest.body["inputs"] = {data, tokenizer_file};
    manifest.body["config"] = train_config_json(settings.train, settings.model);
    manifest.body["budget_bytes"] =
        budget_bytes > 0 ? nlohmann::json(budget_bytes) : nlohmann::json("unbounded");

    TrainOutput result = train(initial, dataset, settings.train, budget);

    Checkpoint ckpt;
    ckpt.model = result.model;
    ckpt.quantized_base = result.quantized_base;
    ckpt.tokenizer = tk;
    ckpt.adapters = result.adapters;
    save_checkpoint(manifest.dir / "checkpoint.bin", ckpt);
    write_text(manifest.dir / "metrics.csv", metrics_csv(result.metrics));

    manifest.body["outputs"] = {"checkpoint.bin", "metrics.csv"};
    manifest.body["final_loss"] = result.metrics.back().loss;
    manifest.body["offload_events"] = result.budget.events.size();
    manifest.body["fast_pool_peak_bytes"] = result.budget.peak;
    manifest.finish();
    err << "trained " << settings.train.total_steps << " steps; final loss "
        << result.metrics.back().loss << "; checkpoint at "
        << (manifest.dir / "checkpoint.bin") << "\n";
    return 0;
}

int run_generate(const std::string& checkpoint_file, const std::string& prompt_file,
                 int max_new, std::ostream& out) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_file);
    const std::string prompt = read_text(prompt_file);
    std::vector<int> ids{Tokenizer::kBos};
    for (int id : encode(ckpt.tokenizer, prompt)) ids.push_back(id);
    const std::vector<int> completion =
        generate(ckpt.model, ckpt.adapters.empty() ? nullptr : &ckpt.adapters, ids,
                 max_new);
    out << decode(ckpt.tokenizer, completion) << "\n";
    return 0;
}

int run_eval(const std::string& checkpoint_file, const std::string& testset,
             const std::string& out, int max_new, std::ostream& err) {
    ManifestScope manifest(resolve_out(out, "eval"), "eval");
    const Checkpoint ckpt = load_checkpoint(checkpoint_file);
    const std::vector<TrainingExample> raw = read_examples_jsonl(testset);

    std::vector<EvalCase> cases;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        cases.push_back(
            {"case" + std::to_string(i + 1), raw[i].prompt, raw[i].completion});
    }
    const EvalReport report =
        evaluate_corpus(ckpt.model, ckpt.adapters.empty() ? nullptr : &ckpt.adapters,
                        ckpt.tokenizer, cases, {"1", "2", "L"}, max_new);

    write_text(manifest.dir / "scores.csv", scores_csv(report));
    write_text(manifest.dir / "summary.md", summary_markdown(report));
    write_text(manifest.dir / "summary.json", summary_json(report));
    {
        std::ostringstream gens;
        for (const CaseScores& cs : report.cases) {
            gens << nlohmann::json{{"case_id", cs.case_id},
                                   {"generated", cs.generated},
                                   {"failed", cs.failed}}
                        .dump()
                 << '\n';
        }
        write_text(manifest.dir / "generations.jsonl", gens.str());
    }
    manifest.body["inputs"] = {checkpoint_file, testset};
    manifest.body["outputs"] = {"scores.csv", "summary.md", "summary.json",
                                "generations.jsonl"};
    manifest.finish();
    err << "evaluated " << cases.size() << " cases; reports under " << manifest.dir
        << "\n";
    return 0;
}

int run_report(const std::string& ratings_file, const std::string& scores_file,
               const std::string& out, std::ostream& err) {
    ManifestScope manifest(resolve_out(out, "report"), "report");
    const std::vector<RatingSheet> sheets = parse_ratings_csv(read_text(ratings_file));
    const RatingsSummary summary = aggregate_ratings(sheets);

    std::ostringstream csv;
    csv << "dimension,mean_by_case,mean_pooled,sd_pooled\n";
    csv.precision(17);
    for (const char* dim : kRatingDimensions) {
        const DimensionStats& d = summary.dimensions.at(dim);
        csv << dim << ',' << d.mean_by_case << ',' << d.mean_pooled << ','
            << d.sd_pooled << '\n';
    }
    csv << "case_id,mean,sd,sheets\n";
    for (const CaseStats& cs : summary.cases) {
        csv << cs.case_id << ',' << cs.mean << ',' << cs.sd << ',' << cs.sheet_count
            << '\n';
    }
    write_text(manifest.dir / "ratings_summary.csv", csv.str());

    std::ostringstream md;
    md << "| dimension | mean (by case) | mean (pooled) | sd |\n";
    md << "|-----------|----------------|---------------|----|\n";
    md.precision(4);
    for (const char* dim : kRatingDimensions) {
        const DimensionStats& d = summary.dimensions.at(dim);
        md << "| " << dim << " | " << d.mean_by_case << " | " << d.mean_pooled << " | "
           << d.sd_pooled << " |\n";
    }
    md << "\nLowest case: " << summary.lowest_case().case_id << " (mean "
       << summary.lowest_case().mean << ")\n";
    write_text(manifest.dir / "ratings_summary.md", md.str());

    nlohmann::json j;
    for (const char* dim : kRatingDimensions) {
        const DimensionStats& d = summary.dimensions.at(dim);
        j["dimensions"][dim] = {{"mean_by_case", d.mean_by_case},
                                {"mean_pooled", d.mean_pooled},
                                {"sd_pooled", d.sd_pooled}};
    }
    for (const CaseStats& cs : summary.cases) {
        j["cases"].push_back({{"case_id", cs.case_id},
                              {"mean", cs.mean},
                              {"sd", cs.sd},
                              {"sheets", cs.sheet_count}});
    }
    j["lowest_case"] = summary.lowest_case().case_id;
    std::vector<std::string> outputs{"ratings_summary.csv", "ratings_summary.md",
                                     "ratings_summary.json"};
    if (!scores_file.empty()) {
        j["scores_csv"] = read_text(scores_file);  // carried alongside the ratings
        outputs.push_back("(embedded scores)");
    }
    write_text(manifest.dir / "ratings_summary.json", j.dump(2) + "\n");

    manifest.body["inputs"] = {ratings_file};
    manifest.body["outputs"] = outputs;
    manifest.finish();
    err << "aggregated " << sheets.size() << " rating sheets under " << manifest.dir
        << "\n";
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"letterlm: desk-scale LoRA/QLoRA fine-tuning and evaluation for "
                 "physician-letter generation"};
    app.require_subcommand(1);

    // synth
    std::uint64_t synth_seed = 0;
    int synth_n = 100;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic letter corpus");
    synth->add_option("--seed", synth_seed, "corpus seed")->required();
    synth->add_option("--n", synth_n, "number of letters")->required();
    synth->add_option("--out", synth_out, "output JSONL path")->required();

    // prepare
    std::string prep_input, prep_out, prep_task = "letter";
    bool prep_anon = false;
    long prep_shift = 0;
    int prep_max_tokens = 2000, prep_vocab = 512;
    CLI::App* prepare = app.add_subcommand("prepare", "parse letters into training examples");
    prepare->add_option("--input", prep_input, "corpus JSONL or directory of .txt")
        ->required();
    prepare->add_option("--out", prep_out, "output run directory");
    prepare->add_option("--task", prep_task, "summary|letter")
        ->check(CLI::IsMember({"summary", "letter"}));
    prepare->add_flag("--anonymize", prep_anon, "apply display anonymization");
    prepare->add_option("--shift-days", prep_shift, "date shift for anonymization");
    prepare->add_option("--max-tokens", prep_max_tokens, "token budget per example");
    prepare->add_option("--vocab-size", prep_vocab, "tokenizer vocabulary size");

    // train
    std::string train_data, train_tokenizer, train_out, train_config_file;
    std::size_t train_budget = 0;
    long train_steps = -1;
    double train_lr = -1.0;
    std::int64_t train_seed = -1;
    int train_rank = -1;
    bool train_full = false, train_qbase = false, train_q8state = false;
    CLI::App* train_cmd = app.add_subcommand("train", "fine-tune on prepared examples");
    train_cmd->add_option("--data", train_data, "examples JSONL")->required();
    train_cmd->add_option("--tokenizer", train_tokenizer, "tokenizer JSON")->required();
    train_cmd->add_option("--out", train_out, "run directory");
    train_cmd->add_option("--config", train_config_file, "key=value config file");
    train_cmd->add_option("--budget-bytes", train_budget, "fast-pool capacity");
    train_cmd->add_option("--steps", train_steps, "override total steps");
    train_cmd->add_option("--lr", train_lr, "override learning rate");
    train_cmd->add_option("--seed", train_seed, "override seed");
    train_cmd->add_option("--rank", train_rank, "override adapter rank");
    train_cmd->add_flag("--full", train_full, "full-parameter training (no adapters)");
    train_cmd->add_flag("--quantize-base", train_qbase, "8-bit quantized frozen base");
    train_cmd->add_flag("--state-8bit", train_q8state, "8-bit optimizer state");

    // generate
    std::string gen_checkpoint, gen_prompt;
    int gen_max_new = 128;
    CLI::App* gen = app.add_subcommand("generate", "greedy completion for a prompt file");
    gen->add_option("--checkpoint", gen_checkpoint, "model checkpoint")->required();
    gen->add_option("--prompt-file", gen_prompt, "prompt text file")->required();
    gen->add_option("--max-new", gen_max_new, "max new tokens");

    // eval
    std::string eval_checkpoint, eval_testset, eval_out;
    int eval_max_new = 128;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score generations against references");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--testset", eval_testset, "examples JSONL with references")
        ->required();
    eval_cmd->add_option("--out", eval_out, "report directory");
    eval_cmd->add_option("--max-new", eval_max_new, "max new tokens");

    // report
    std::string report_ratings, report_scores, report_out;
    CLI::App* report = app.add_subcommand("report", "aggregate expert rating sheets");
    report->add_option("--ratings", report_ratings, "ratings CSV")->required();
    report->add_option("--scores", report_scores, "eval scores CSV to embed");
    report->add_option("--out", report_out, "report directory");

    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());  // CLI11 reversed
        app.parse(args);

        if (*synth) return run_synth(synth_seed, synth_n, synth_out);
        if (*prepare) {
            return run_prepare(prep_input, prep_out, prep_task, prep_anon, prep_shift,
                               prep_max_tokens, prep_vocab, err);
        }
        if (*train_cmd) {
            RunSettings settings;
            if (!train_config_file.empty()) {
                settings = load_run_settings(train_config_file);
            }
            if (train_steps >= 0) settings.train.total_steps = train_steps;
            if (train_lr >= 0.0) settings.train.learning_rate = train_lr;
            if (train_seed >= 0) {
                settings.train.seed = static_cast<std::uint64_t>(train_seed);
            }
            if (train_rank > 0) settings.train.lora_rank = train_rank;
            if (train_full) settings.train.use_lora = false;
            if (train_qbase) settings.train.quantize_base = true;
            if (train_q8state) settings.train.quantized_optim_state = true;
            return run_train(train_data, train_tokenizer, train_out, settings,
                             train_budget, err);
        }
        if (*gen) return run_generate(gen_checkpoint, gen_prompt, gen_max_new, out);
        if (*eval_cmd) {
            return run_eval(eval_checkpoint, eval_testset, eval_out, eval_max_new, err);
        }
        if (*report) return run_report(report_ratings, report_scores, report_out, err);
        err << app.help();
        return 1;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    } catch (const LetterParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace letterlm::cli
