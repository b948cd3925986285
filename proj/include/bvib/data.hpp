#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/matrix.hpp"
#include "bvib/rng.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// dataset
// ---------------------------------------------------------------------------

struct Dataset {
    Matrix images;           // M x dim, values in [0, 1]
    std::vector<int> labels; // M class ids in [0, classes)
    int num_classes = 10;

    std::size_t size() const { return labels.size(); }
};

// ---------------------------------------------------------------------------
// IDX container parsing
// ---------------------------------------------------------------------------
// Big-endian IDX: magic (0x00000803 for images, 0x00000801 for labels),
// big-endian u32 dimensions, then raw bytes.

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;

namespace detail {

inline std::uint32_t read_u32_be(std::istream& is, const std::string& path, const char* what) {
    std::uint8_t bytes[4];
    const auto offset = static_cast<long long>(is.tellg());
    is.read(reinterpret_cast<char*>(bytes), 4);
    if (!is)
        throw ParseError(path + ": truncated while reading " + what + " at offset " + std::to_string(offset));
    return static_cast<std::uint32_t>(bytes[0]) << 24 | static_cast<std::uint32_t>(bytes[1]) << 16 |
           static_cast<std::uint32_t>(bytes[2]) << 8 | static_cast<std::uint32_t>(bytes[3]);
}

inline void write_u32_be(std::ostream& os, std::uint32_t v) {
    const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
}

} // namespace detail

inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw ParseError(images_path + ": cannot open");
    const std::uint32_t img_magic = detail::read_u32_be(img, images_path, "magic");
    if (img_magic != kIdxImagesMagic)
        throw ParseError(images_path + ": bad image magic at offset 0 (expected 0x00000803)");
    const std::uint32_t count = detail::read_u32_be(img, images_path, "item count");
    const std::uint32_t height = detail::read_u32_be(img, images_path, "row count");
    const std::uint32_t width = detail::read_u32_be(img, images_path, "column count");
    const std::size_t dim = static_cast<std::size_t>(height) * width;

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(count) * dim);
    img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(img.gcount()) != pixels.size())
        throw ParseError(images_path + ": truncated pixel data (expected " + std::to_string(pixels.size()) +
                         " bytes after the 16-byte header, got " + std::to_string(img.gcount()) + ")");

    std::ifstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw ParseError(labels_path + ": cannot open");
    const std::uint32_t lbl_magic = detail::read_u32_be(lbl, labels_path, "magic");
    if (lbl_magic != kIdxLabelsMagic)
        throw ParseError(labels_path + ": bad label magic at offset 0 (expected 0x00000801)");
    const std::uint32_t lbl_count = detail::read_u32_be(lbl, labels_path, "item count");
    if (lbl_count != count)
        throw ParseError(labels_path + ": label count " + std::to_string(lbl_count) + " does not match image count " +
                         std::to_string(count));
    std::vector<std::uint8_t> raw_labels(lbl_count);
    lbl.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(raw_labels.size()));
    if (static_cast<std::size_t>(lbl.gcount()) != raw_labels.size())
        throw ParseError(labels_path + ": truncated label data (expected " + std::to_string(raw_labels.size()) +
                         " bytes after the 8-byte header, got " + std::to_string(lbl.gcount()) + ")");

    Dataset ds;
    ds.images = Matrix(count, dim);
    for (std::size_t i = 0; i < pixels.size(); ++i) ds.images.data[i] = static_cast<double>(pixels[i]) / 255.0;
    ds.labels.assign(raw_labels.begin(), raw_labels.end());
    return ds;
}

// Re-serializes a dataset to the same IDX layout (images as H x W with
// H = W when dim is square, else 1 x dim). Pixels are recovered by the exact
// inverse of the load normalization.
inline void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path) {
    std::size_t h = 1, w = ds.images.cols;
    for (std::size_t s = 1; s * s <= ds.images.cols; ++s)
        if (s * s == ds.images.cols) {
            h = s;
            w = s;
        }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw ParseError(images_path + ": cannot open for writing");
    detail::write_u32_be(img, kIdxImagesMagic);
    detail::write_u32_be(img, static_cast<std::uint32_t>(ds.size()));
    detail::write_u32_be(img, static_cast<std::uint32_t>(h));
    detail::write_u32_be(img, static_cast<std::uint32_t>(w));
    for (double v : ds.images.data) {
        const auto byte = static_cast<std::uint8_t>(v * 255.0 + 0.5);
        img.write(reinterpret_cast<const char*>(&byte), 1);
    }

    std::ofstream lbl(labels_path, std::ios::binary);
    if (!lbl) throw ParseError(labels_path + ": cannot open for writing");
    detail::write_u32_be(lbl, kIdxLabelsMagic);
    detail::write_u32_be(lbl, static_cast<std::uint32_t>(ds.size()));
    for (int y : ds.labels) {
        const auto byte = static_cast<std::uint8_t>(y);
        lbl.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

// ---------------------------------------------------------------------------
// synthetic data
// ---------------------------------------------------------------------------

// Gaussian blobs, one center per class, clipped to the pixel range. At small
// noise the classes are linearly separable; at noise zero every sample is
// its class center exactly.

namespace detail {

inline Dataset sample_blobs(const Matrix& centers, int per_class, double noise, RngStream& rng) {
    const int classes = static_cast<int>(centers.rows);
    const std::size_t dim = centers.cols;
    Dataset ds;
    ds.num_classes = classes;
    ds.images = Matrix(static_cast<std::size_t>(classes) * per_class, dim);
    ds.labels.reserve(ds.images.rows);
    std::size_t row = 0;
    for (int c = 0; c < classes; ++c) {
        for (int n = 0; n < per_class; ++n, ++row) {
            double* out = ds.images.row(row);
            const double* center = centers.row(static_cast<std::size_t>(c));
            for (std::size_t k = 0; k < dim; ++k) {
                const double v = noise == 0.0 ? center[k] : center[k] + noise * rng.next_gaussian();
                out[k] = std::clamp(v, 0.0, 1.0);
            }
            ds.labels.push_back(c);
        }
    }
    return ds;
}

inline Matrix blob_centers(int classes, std::size_t dim, RngStream& rng) {
    Matrix centers(static_cast<std::size_t>(classes), dim);
    for (double& v : centers.data) v = 0.2 + 0.6 * rng.next_unit();
    return centers;
}

} // namespace detail

inline Dataset make_synthetic(int classes, std::size_t dim, int per_class, double noise, std::uint64_t seed) {
    if (classes < 1 || per_class < 0) throw ConfigError("make_synthetic: counts must be non-negative");
    RngStream rng = derive_stream(seed, StreamPurpose::synthetic_data);
    const Matrix centers = detail::blob_centers(classes, dim, rng);
    return detail::sample_blobs(centers, per_class, noise, rng);
}

// Train and test splits drawn around the same class centers.
inline std::pair<Dataset, Dataset> make_synthetic_split(int classes, std::size_t dim, int per_class_train,
                                                        int per_class_test, double noise, std::uint64_t seed) {
    if (classes < 1 || per_class_train < 0 || per_class_test < 0)
        throw ConfigError("make_synthetic_split: counts must be non-negative");
    RngStream rng = derive_stream(seed, StreamPurpose::synthetic_data);
    const Matrix centers = detail::blob_centers(classes, dim, rng);
    Dataset train = detail::sample_blobs(centers, per_class_train, noise, rng);
    Dataset test = detail::sample_blobs(centers, per_class_test, noise, rng);
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// sharding and batching
// ---------------------------------------------------------------------------

struct Shard {
    int pair_id = 0;
    std::vector<std::size_t> indices; // into the parent dataset
};

// Deterministic near-equal partition after a seeded shuffle. Shards are
// pairwise disjoint and cover the dataset.
inline std::vector<Shard> shard_dataset(const Dataset& ds, int pairs, std::uint64_t seed) {
    if (pairs < 1) throw ConfigError("shard_dataset: pairs must be >= 1");
    if (static_cast<std::size_t>(pairs) > ds.size())
        throw ConfigError("shard_dataset: more pairs (" + std::to_string(pairs) + ") than samples (" +
                          std::to_string(ds.size()) + ")");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng = derive_stream(seed, StreamPurpose::shard);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_below(i))]);

    std::vector<Shard> shards(static_cast<std::size_t>(pairs));
    const std::size_t base = ds.size() / static_cast<std::size_t>(pairs);
    const std::size_t extra = ds.size() % static_cast<std::size_t>(pairs);
    std::size_t cursor = 0;
    for (int p = 0; p < pairs; ++p) {
        auto& sh = shards[static_cast<std::size_t>(p)];
        sh.pair_id = p;
        const std::size_t take = base + (static_cast<std::size_t>(p) < extra ? 1 : 0);
        sh.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                          order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
        cursor += take;
    }
    return shards;
}

// Materializes one batch of a shard as a dense matrix plus labels. Batch
// size is shard size / batches with the remainder dropped.
struct Batch {
    Matrix x;
    std::vector<int> y;
};

inline std::size_t batch_size_for(const Shard& shard, std::uint64_t batches) {
    return shard.indices.size() / batches;
}

inline Batch take_batch(const Dataset& ds, const Shard& shard, const std::vector<std::size_t>& order,
                        std::uint64_t batch_index, std::size_t batch_size) {
    Batch b;
    b.x = Matrix(batch_size, ds.images.cols);
    b.y.resize(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t pos = batch_index * batch_size + i;
        const std::size_t sample = shard.indices[order[pos]];
        const double* src = ds.images.row(sample);
        std::copy(src, src + ds.images.cols, b.x.row(i));
        b.y[i] = ds.labels[sample];
    }
    return b;
}

} // namespace bvib
