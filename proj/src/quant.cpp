// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/quant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace letterlm {

std::size_t QuantizedMatrix::byte_size() const {
    const std::size_t header = sizeof(rows) + sizeof(cols) + sizeof(bit_width) +
                               sizeof(block_size);
    const std::size_t code_bytes =
        (entry_count() * static_cast<std::size_t>(bit_width) + 7) / 8;
    return header + code_bytes + scales.size() * sizeof(double);
}

QuantizedMatrix quantize_blockwise(const Matrix& w, int bit_width, int block_size) {
    if (bit_width != 4 && bit_width != 8) {
        throw std::invalid_argument("quantize_blockwise: bit_width must be 4 or 8");
    }
    if (block_size < 1) {
        throw std::invalid_argument("quantize_blockwise: block_size must be >= 1");
    }
    if (!w.allFinite()) {
        throw std::invalid_argument("quantize_blockwise: input has non-finite entries");
    }

    QuantizedMatrix q;
    q.rows = static_cast<int>(w.rows());
    q.cols = static_cast<int>(w.cols());
    q.bit_width = bit_width;
    q.block_size = block_size;
    const std::size_t n = q.entry_count();
    q.codes.resize(n);
    const std::size_t blocks = n == 0 ? 0 : (n - 1) / static_cast<std::size_t>(block_size) + 1;
    q.scales.resize(blocks);

    const double qmax = static_cast<double>(q.max_code());
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * static_cast<std::size_t>(block_size);
        const std::size_t end = std::min(n, begin + static_cast<std::size_t>(block_size));
        double absmax = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = w(static_cast<Eigen::Index>(i / static_cast<std::size_t>(q.cols)),
                               static_cast<Eigen::Index>(i % static_cast<std::size_t>(q.cols)));
            absmax = std::max(absmax, std::abs(v));
        }
        if (absmax == 0.0) {
            q.scales[b] = 0.0;
            for (std::size_t i = begin; i < end; ++i) q.codes[i] = 0;
            continue;
        }
        const double scale = absmax / qmax;
        q.scales[b] = scale;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = w(static_cast<Eigen::Index>(i / static_cast<std::size_t>(q.cols)),
                               static_cast<Eigen::Index>(i % static_cast<std::size_t>(q.cols)));
            double code = std::round(v / scale);  // half away from zero
            code = std::clamp(code, -qmax, qmax);
            q.codes[i] = static_cast<std::int8_t>(code);
        }
    }
    return q;
}

Matrix dequantize(const QuantizedMatrix& q) {
    Matrix out(q.rows, q.cols);
    const std::size_t n = q.entry_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = q.scales[i / static_cast<std::size_t>(q.block_size)];
        out(static_cast<Eigen::Index>(i / static_cast<std::size_t>(q.cols)),
            static_cast<Eigen::Index>(i % static_cast<std::size_t>(q.cols))) =
            static_cast<double>(q.codes[i]) * scale;
    }
    return out;
}

Matrix quantized_lora_forward(const QuantizedMatrix& q, const LoraAdapter& adapter,
                              const Matrix& x) {
    return lora_forward(dequantize(q), adapter, x, false, 0);
}

std::vector<std::uint8_t> pack_codes(const QuantizedMatrix& q) {
    const std::size_t n = q.entry_count();
    std::vector<std::uint8_t> out;
    if (q.bit_width == 8) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = static_cast<std::uint8_t>(q.codes[i]);
        }
        return out;
    }
    out.resize((n + 1) / 2, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t nibble = static_cast<std::uint8_t>(q.codes[i]) & 0x0F;
        if (i % 2 == 0) {
            out[i / 2] |= nibble;  // first code in the low nibble
        } else {
            out[i / 2] |= static_cast<std::uint8_t>(nibble << 4);
        }
    }
    return out;
}

void unpack_codes(const std::vector<std::uint8_t>& packed, QuantizedMatrix& q) {
    const std::size_t n = q.entry_count();
    q.codes.resize(n);
    if (q.bit_width == 8) {
        if (packed.size() != n) {
            throw std::invalid_argument("unpack_codes: size mismatch");
        }
        for (std::size_t i = 0; i < n; ++i) {
            q.codes[i] = static_cast<std::int8_t>(packed[i]);
        }
        return;
    }
    if (packed.size() != (n + 1) / 2) {
        throw std::invalid_argument("unpack_codes: size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t nibble = i % 2 == 0 ? packed[i / 2] & 0x0F
                                         : static_cast<std::uint8_t>(packed[i / 2] >> 4);
        // sign-extend the 4-bit two's complement nibble
        if (nibble & 0x08) nibble |= 0xF0;
        q.codes[i] = static_cast<std::int8_t>(nibble);
    }
}

}  // namespace letterlm
