// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "letterlm/lora.hpp"
#include "letterlm/tape.hpp"

namespace letterlm {

// Block-wise absmax quantized weight. Blocks run over consecutive
// row-major entries; each block stores one full-precision scale.
// Codes use the symmetric signed range [-(2^(w-1)-1), 2^(w-1)-1], so
// zero is exactly representable and an all-zero block has scale 0.
struct QuantizedMatrix {
    int rows = 0;
    int cols = 0;
    int bit_width = 8;  // 4 or 8
    int block_size = 64;
    std::vector<std::int8_t> codes;  // one per entry, row-major order
    std::vector<double> scales;      // one per block

    std::size_t entry_count() const {
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
    int max_code() const { return (1 << (bit_width - 1)) - 1; }

    // Accounted footprint: packed codes + 8-byte scales + header.
    std::size_t byte_size() const;
};

// scale = absmax / (2^(w-1)-1) per block, codes = round-half-away-from-
// zero(entry / scale). Rejects non-finite input.
QuantizedMatrix quantize_blockwise(const Matrix& w, int bit_width, int block_size);

// entry = code * block scale; deterministic.
Matrix dequantize(const QuantizedMatrix& q);

// dequantize(Q)*x + (alpha/r)*B*(A*x). Codes and scales never change;
// only the adapter carries gradients on the tape route.
Matrix quantized_lora_forward(const QuantizedMatrix& q, const LoraAdapter& adapter,
                              const Matrix& x);

// Packed wire form used by the checkpoint: two 4-bit codes per byte,
// little-end first (first code in the low nibble).
std::vector<std::uint8_t> pack_codes(const QuantizedMatrix& q);
void unpack_codes(const std::vector<std::uint8_t>& packed, QuantizedMatrix& q);

}  // namespace letterlm
