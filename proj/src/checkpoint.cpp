// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace letterlm {

namespace {

constexpr char kModelMagic[4] = {'L', 'L', 'M', 'C'};
constexpr char kAdapterMagic[4] = {'L', 'L', 'A', 'D'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) {
            throw std::runtime_error("checkpoint: cannot open '" + path.string() +
                                     "' for writing");
        }
    }

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void matrix(const Matrix& m) {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {  // row-major on the wire
            for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
        }
    }
    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("checkpoint: write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) {
            throw std::runtime_error("checkpoint: cannot open '" + path.string() + "'");
        }
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw std::runtime_error("checkpoint: truncated file");
        }
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    Matrix matrix() {
        const auto rows = static_cast<Eigen::Index>(u64());
        const auto cols = static_cast<Eigen::Index>(u64());
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
        }
        return m;
    }

private:
    std::ifstream in_;
};

void write_quantized(Writer& w, const QuantizedMatrix& q) {
    w.i32(q.rows);
    w.i32(q.cols);
    w.i32(q.bit_width);
    w.i32(q.block_size);
    const std::vector<std::uint8_t> packed = pack_codes(q);
    w.u64(packed.size());
    w.bytes(packed.data(), packed.size());
    w.u64(q.scales.size());
    for (double s : q.scales) w.f64(s);
}

QuantizedMatrix read_quantized(Reader& r) {
    QuantizedMatrix q;
    q.rows = r.i32();
    q.cols = r.i32();
    q.bit_width = r.i32();
    q.block_size = r.i32();
    std::vector<std::uint8_t> packed(r.u64());
    r.bytes(packed.data(), packed.size());
    unpack_codes(packed, q);
    q.scales.resize(r.u64());
    for (double& s : q.scales) s = r.f64();
    return q;
}

void write_adapter(Writer& w, const std::string& name, const LoraAdapter& a) {
    w.str(name);
    w.i32(a.rank);
    w.f64(a.alpha);
    w.f64(a.dropout);
    w.matrix(a.A);
    w.matrix(a.B);
}

std::pair<std::string, LoraAdapter> read_adapter(Reader& r) {
    std::string name = r.str();
    LoraAdapter a;
    a.rank = r.i32();
    a.alpha = r.f64();
    a.dropout = r.f64();
    a.A = r.matrix();
    a.B = r.matrix();
    a.target_name = name;
    return {std::move(name), std::move(a)};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    Writer w(path);
    w.bytes(kModelMagic, 4);
    w.u32(kVersion);

    const ModelConfig& cfg = ckpt.model.config;
    w.i32(cfg.vocab_size);
    w.i32(cfg.d_model);
    w.i32(cfg.n_heads);
    w.i32(cfg.n_layers);
    w.i32(cfg.d_ff);
    w.i32(cfg.max_seq_len);
    w.u32(static_cast<std::uint32_t>(cfg.lora_targets.size()));
    for (const std::string& t : cfg.lora_targets) w.str(t);

    w.u32(static_cast<std::uint32_t>(ckpt.tokenizer.id_to_token.size()));
    for (const std::string& tok : ckpt.tokenizer.id_to_token) w.str(tok);

    w.u32(ckpt.quantized_base ? 1 : 0);
    w.matrix(ckpt.model.tok_embed);
    w.matrix(ckpt.model.pos_embed);
    for (const LayerWeights& lw : ckpt.model.layers) {
        w.matrix(lw.attn_norm);
        w.matrix(lw.mlp_norm);
    }
    w.matrix(ckpt.model.final_norm);

    if (ckpt.quantized_base) {
        const QuantizedBase& qb = *ckpt.quantized_base;
        w.i32(qb.bit_width);
        w.i32(qb.block_size);
        w.u32(static_cast<std::uint32_t>(qb.projections.size()));
        for (const auto& [name, q] : qb.projections) {
            w.str(name);
            write_quantized(w, q);
        }
    } else {
        for (const LayerWeights& lw : ckpt.model.layers) {
            w.matrix(lw.q_proj);
            w.matrix(lw.k_proj);
            w.matrix(lw.v_proj);
            w.matrix(lw.o_proj);
            w.matrix(lw.gate_proj);
            w.matrix(lw.up_proj);
            w.matrix(lw.down_proj);
        }
        w.matrix(ckpt.model.lm_head);
    }

    w.u32(static_cast<std::uint32_t>(ckpt.adapters.by_name.size()));
    for (const auto& [name, a] : ckpt.adapters.by_name) write_adapter(w, name, a);
    w.close();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic in '" + path.string() + "'");
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " +
                                 std::to_string(version));
    }

    Checkpoint ckpt;
    ModelConfig cfg;
    cfg.vocab_size = r.i32();
    cfg.d_model = r.i32();
    cfg.n_heads = r.i32();
    cfg.n_layers = r.i32();
    cfg.d_ff = r.i32();
    cfg.max_seq_len = r.i32();
    cfg.lora_targets.resize(r.u32());
    for (std::string& t : cfg.lora_targets) t = r.str();

    ckpt.tokenizer.id_to_token.resize(r.u32());
    for (std::string& tok : ckpt.tokenizer.id_to_token) tok = r.str();
    for (std::size_t i = 0; i < ckpt.tokenizer.id_to_token.size(); ++i) {
        ckpt.tokenizer.token_to_id[ckpt.tokenizer.id_to_token[i]] = static_cast<int>(i);
    }

    const bool quantized = r.u32() != 0;
    ckpt.model.config = cfg;
    ckpt.model.tok_embed = r.matrix();
    ckpt.model.pos_embed = r.matrix();
    ckpt.model.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (LayerWeights& lw : ckpt.model.layers) {
        lw.attn_norm = r.matrix();
        lw.mlp_norm = r.matrix();
    }
    ckpt.model.final_norm = r.matrix();

    if (quantized) {
        QuantizedBase qb;
        qb.bit_width = r.i32();
        qb.block_size = r.i32();
        const std::uint32_t count = r.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            std::string name = r.str();
            qb.projections[name] = read_quantized(r);
        }
        ckpt.quantized_base = std::move(qb);
        ckpt.model = apply_quantized_base(ckpt.model, *ckpt.quantized_base);
    } else {
        for (LayerWeights& lw : ckpt.model.layers) {
            lw.q_proj = r.matrix();
            lw.k_proj = r.matrix();
            lw.v_proj = r.matrix();
            lw.o_proj = r.matrix();
            lw.gate_proj = r.matrix();
            lw.up_proj = r.matrix();
            lw.down_proj = r.matrix();
        }
        ckpt.model.lm_head = r.matrix();
    }

    const std::uint32_t adapter_count = r.u32();
    for (std::uint32_t i = 0; i < adapter_count; ++i) {
        auto [name, adapter] = read_adapter(r);
        ckpt.adapters.by_name[name] = std::move(adapter);
    }
    return ckpt;
}

void save_adapters(const std::filesystem::path& path, const AdapterSet& adapters) {
    Writer w(path);
    w.bytes(kAdapterMagic, 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(adapters.by_name.size()));
    for (const auto& [name, a] : adapters.by_name) write_adapter(w, name, a);
    w.close();
}

AdapterSet load_adapters(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kAdapterMagic, 4) != 0) {
        throw std::runtime_error("adapter checkpoint: bad magic in '" + path.string() +
                                 "'");
    }
    if (r.u32() != kVersion) {
        throw std::runtime_error("adapter checkpoint: unsupported version");
    }
    AdapterSet set;
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        auto [name, adapter] = read_adapter(r);
        set.by_name[name] = std::move(adapter);
    }
    return set;
}

}  // namespace letterlm
