// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "letterlm/letters.hpp"
#include "letterlm/trainer.hpp"

namespace letterlm::cli {

// Subcommand dispatch. Exit codes: 0 success, 1 validation error,
// 2 internal error. Diagnostics go to `err`; payload output (generate)
// goes to `out`.
int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

// Key=value config file mirroring TrainConfig (plus the model sizes).
// Unknown keys are rejected. Flags given on the command line override
// file values.
struct RunSettings {
    TrainConfig train;
    ModelConfig model;
};
RunSettings load_run_settings(const std::filesystem::path& config_file);

// Corpus files: one letter per .txt file in a directory, or a JSON-lines
// file of {"raw": "..."} objects.
std::vector<std::string> read_corpus(const std::filesystem::path& input);
void write_corpus_jsonl(const std::filesystem::path& path,
                        const std::vector<std::string>& letters);

std::vector<TrainingExample> read_examples_jsonl(const std::filesystem::path& path);
void write_examples_jsonl(const std::filesystem::path& path,
                          const std::vector<TrainingExample>& examples);

void save_tokenizer(const std::filesystem::path& path, const Tokenizer& tk);
Tokenizer load_tokenizer(const std::filesystem::path& path);

}  // namespace letterlm::cli
