// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>

#include "letterlm/model.hpp"
#include "letterlm/tokenizer.hpp"

namespace letterlm {

// Versioned little-endian binary bundle: config, tokenizer, base weights
// (full precision, or a quantized section with packed codes), adapters.
// Doubles are stored bit-exactly, so a load reproduces evaluation
// outputs bit for bit.
struct Checkpoint {
    ModelWeights model;  // dequantized view when quantized_base is set
    std::optional<QuantizedBase> quantized_base;
    Tokenizer tokenizer;
    AdapterSet adapters;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Standalone adapter checkpoint; round-trips bit-exactly.
void save_adapters(const std::filesystem::path& path, const AdapterSet& adapters);
AdapterSet load_adapters(const std::filesystem::path& path);

}  // namespace letterlm
