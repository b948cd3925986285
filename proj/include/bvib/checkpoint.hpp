#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/matrix.hpp"
#include "bvib/vib.hpp"

namespace bvib {

// Model checkpoint container. Layout (all little-endian):
//   magic "BVIBCKP1" (8 bytes)
//   u32 record count
//   per record: u32 name length, name bytes, u64 rows, u64 cols,
//               rows*cols doubles as raw IEEE-754 bytes
// Vectors are stored as 1 x n records. Round-trips are bit-exact.

inline constexpr char kCheckpointMagic[8] = {'B', 'V', 'I', 'B', 'C', 'K', 'P', '1'};

namespace detail {

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>(v >> (8 * i));
    os.write(b, 4);
}

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
    os.write(b, 8);
}

inline std::uint32_t read_u32_le(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw ParseError(path + ": truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

inline std::uint64_t read_u64_le(std::istream& is, const std::string& path) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw ParseError(path + ": truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
    return v;
}

} // namespace detail

struct NamedMatrix {
    std::string name;
    Matrix matrix;
};

inline void save_checkpoint(const std::string& path, const std::vector<NamedMatrix>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError(path + ": cannot open for writing");
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_u32_le(os, static_cast<std::uint32_t>(records.size()));
    for (const auto& r : records) {
        detail::write_u32_le(os, static_cast<std::uint32_t>(r.name.size()));
        os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
        detail::write_u64_le(os, r.matrix.rows);
        detail::write_u64_le(os, r.matrix.cols);
        os.write(reinterpret_cast<const char*>(r.matrix.data.data()),
                 static_cast<std::streamsize>(r.matrix.data.size() * sizeof(double)));
    }
    if (!os) throw ParseError(path + ": write failed");
}

inline std::vector<NamedMatrix> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError(path + ": cannot open");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw ParseError(path + ": bad checkpoint magic");
    const std::uint32_t count = detail::read_u32_le(is, path);
    std::vector<NamedMatrix> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedMatrix r;
        const std::uint32_t name_len = detail::read_u32_le(is, path);
        r.name.resize(name_len);
        is.read(r.name.data(), name_len);
        const std::uint64_t rows = detail::read_u64_le(is, path);
        const std::uint64_t cols = detail::read_u64_le(is, path);
        r.matrix = Matrix(rows, cols);
        is.read(reinterpret_cast<char*>(r.matrix.data.data()),
                static_cast<std::streamsize>(rows * cols * sizeof(double)));
        if (!is) throw ParseError(path + ": truncated matrix data in record " + std::to_string(i));
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// model-level helpers
// ---------------------------------------------------------------------------

inline Matrix vector_as_row(const Vector& v) {
    Matrix m(1, v.size());
    m.data = v;
    return m;
}

inline void save_model(const std::string& path, const Encoder& enc, const Decoder& dec) {
    std::vector<NamedMatrix> records;
    records.push_back({"encoder.trunk.w", enc.trunk.w});
    records.push_back({"encoder.trunk.b", vector_as_row(enc.trunk.b)});
    records.push_back({"encoder.mu_head.w", enc.mu_head.w});
    records.push_back({"encoder.mu_head.b", vector_as_row(enc.mu_head.b)});
    records.push_back({"encoder.logvar_head.w", enc.logvar_head.w});
    records.push_back({"encoder.logvar_head.b", vector_as_row(enc.logvar_head.b)});
    records.push_back({"decoder.hidden.w", dec.hidden.w});
    records.push_back({"decoder.hidden.b", vector_as_row(dec.hidden.b)});
    records.push_back({"decoder.out.w", dec.out.w});
    records.push_back({"decoder.out.b", vector_as_row(dec.out.b)});
    save_checkpoint(path, records);
}

inline void load_model(const std::string& path, Encoder& enc, Decoder& dec) {
    const auto records = load_checkpoint(path);
    auto find = [&](const char* name) -> const Matrix& {
        for (const auto& r : records)
            if (r.name == name) return r.matrix;
        throw ParseError(path + std::string(": missing record ") + name);
    };
    auto as_vector = [](const Matrix& m) { return m.data; };

    enc.trunk.w = find("encoder.trunk.w");
    enc.trunk.b = as_vector(find("encoder.trunk.b"));
    enc.mu_head.w = find("encoder.mu_head.w");
    enc.mu_head.b = as_vector(find("encoder.mu_head.b"));
    enc.logvar_head.w = find("encoder.logvar_head.w");
    enc.logvar_head.b = as_vector(find("encoder.logvar_head.b"));
    enc.hidden_dim = enc.trunk.w.rows;
    enc.input_dim = enc.trunk.w.cols;
    enc.latent_dim = enc.mu_head.w.rows;

    dec.hidden.w = find("decoder.hidden.w");
    dec.hidden.b = as_vector(find("decoder.hidden.b"));
    dec.out.w = find("decoder.out.w");
    dec.out.b = as_vector(find("decoder.out.b"));
    dec.latent_dim = dec.hidden.w.cols;
    dec.hidden_dim = dec.hidden.w.rows;
    dec.num_classes = dec.out.w.rows;

    if (enc.latent_dim != dec.latent_dim)
        throw ParseError(path + ": encoder latent width does not match decoder input width");
}

} // namespace bvib
