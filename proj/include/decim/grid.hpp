// Regular-grid decomposition of the normalized unit cube: bucket keys over
// the 2^n x 2^n x 2^n subdivision, the radix-sorted key/index table, and
// 27-cell neighborhood enumeration.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <utility>
#include <vector>

#include "decim/core.hpp"
#include "decim/exec.hpp"

namespace decim {

using BucketKey = std::uint32_t;

struct GridParams {
    static constexpr int kMinExponent = 1;
    static constexpr int kMaxExponent = 10;
    static constexpr int kRecommendedMinExponent = 4;
    static constexpr int kRecommendedMaxExponent = 9;

    int n = 6;

    explicit GridParams(int subdivision_exponent) : n(subdivision_exponent) {
        if (n < kMinExponent || n > kMaxExponent)
            throw ConfigError("GridParams: subdivision exponent " + std::to_string(n) +
                              " outside hard bounds [" + std::to_string(kMinExponent) + ", " +
                              std::to_string(kMaxExponent) + "]");
    }

    std::uint32_t cells_per_axis() const { return 1u << n; }
    std::uint32_t bucket_count() const { return 1u << (3 * n); }
    int key_bits() const { return 3 * n; }

    // Exponents outside this band are legal but rarely useful: below it the
    // buckets are too coarse to prune, above it most buckets are empty.
    bool within_recommended_range() const {
        return n >= kRecommendedMinExponent && n <= kRecommendedMaxExponent;
    }
};

// Invertible affine map between a source box and the unit cube [-1,1]^3.
// Axes of zero extent collapse to 0 and cannot be inverted.
struct NormalizationRecord {
    Point center;
    Point half_extent;

    Point normalize_point(const Point& p) const {
        auto map = [](float v, float c, float h) {
            if (h <= 0.0f)
                return 0.0f;
            return std::clamp((v - c) / h, -1.0f, 1.0f);
        };
        return {map(p.x, center.x, half_extent.x), map(p.y, center.y, half_extent.y),
                map(p.z, center.z, half_extent.z)};
    }

    Point denormalize_point(const Point& p) const {
        return {p.x * half_extent.x + center.x, p.y * half_extent.y + center.y,
                p.z * half_extent.z + center.z};
    }

    static NormalizationRecord from_box(const Aabb& box) {
        NormalizationRecord rec;
        rec.center = {(box.min.x + box.max.x) * 0.5f, (box.min.y + box.max.y) * 0.5f,
                      (box.min.z + box.max.z) * 0.5f};
        rec.half_extent = {(box.max.x - box.min.x) * 0.5f, (box.max.y - box.min.y) * 0.5f,
                           (box.max.z - box.min.z) * 0.5f};
        return rec;
    }
};

/// Maps every point of `cloud` into [-1,1]^3. The box must contain all
/// points (inclusive); it normally comes from compute_aabb.
inline std::pair<PointCloud, NormalizationRecord> normalize(const PointCloud& cloud,
                                                            const Aabb& box) {
    const NormalizationRecord rec = NormalizationRecord::from_box(box);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Point& p : cloud.points) {
        if (!box.contains(p))
            throw ConfigError("normalize: point lies outside the supplied box");
        out.points.push_back(rec.normalize_point(p));
    }
    return {std::move(out), rec};
}

namespace detail {

// Cell index along one axis for a normalized coordinate. Coordinates at the
// +1 boundary clamp into the last cell.
inline std::uint32_t cell_index(float coord_norm, std::uint32_t cells_per_axis) {
    const float t = (coord_norm + 1.0f) * 0.5f;
    const auto raw = static_cast<std::int64_t>(
        std::floor(t * static_cast<float>(cells_per_axis)));
    const auto max_index = static_cast<std::int64_t>(cells_per_axis) - 1;
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(raw, 0, max_index));
}

inline BucketKey compose_key(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz, int n) {
    return (ix << (2 * n)) | (iy << n) | iz;
}

struct CellCoords {
    std::uint32_t ix, iy, iz;
};

inline CellCoords decompose_key(BucketKey key, int n) {
    const std::uint32_t mask = (1u << n) - 1u;
    return {key >> (2 * n), (key >> n) & mask, key & mask};
}

inline BucketKey bucket_key_unchecked(const Point& p_norm, const GridParams& grid) {
    const std::uint32_t cells = grid.cells_per_axis();
    return compose_key(cell_index(p_norm.x, cells), cell_index(p_norm.y, cells),
                       cell_index(p_norm.z, cells), grid.n);
}

}  // namespace detail

/// Row-major bucket key of a normalized point: key = ix*2^(2n) + iy*2^n + iz
/// with ix = clamp(floor((x+1)/2 * 2^n), 0, 2^n-1). Equivalent to classifying
/// the point with n successive per-axis binary subdivisions.
inline BucketKey bucket_key(const Point& p_norm, const GridParams& grid) {
    if (p_norm.x < -1.0f || p_norm.x > 1.0f || p_norm.y < -1.0f || p_norm.y > 1.0f ||
        p_norm.z < -1.0f || p_norm.z > 1.0f)
        throw ConfigError("bucket_key: coordinate outside [-1, 1]");
    return detail::bucket_key_unchecked(p_norm, grid);
}

struct KeyIndexPair {
    BucketKey key;
    std::uint32_t index;

    friend bool operator==(const KeyIndexPair&, const KeyIndexPair&) = default;
};

/// Stable LSD radix sort on the key, 8-bit digits, ceil(key_bits/8) passes.
/// Equal keys keep their input order. Keys must be < 2^key_bits.
inline void radix_sort_pairs(std::vector<KeyIndexPair>& pairs, int key_bits = 32) {
    key_bits = std::clamp(key_bits, 1, 32);
    const int passes = (key_bits + 7) / 8;
    std::vector<KeyIndexPair> scratch(pairs.size());
    for (int pass = 0; pass < passes; ++pass) {
        const int shift = pass * 8;
        std::array<std::size_t, 257> offsets{};
        for (const KeyIndexPair& kv : pairs)
            ++offsets[((kv.key >> shift) & 0xFFu) + 1];
        for (int digit = 0; digit < 256; ++digit)
            offsets[static_cast<std::size_t>(digit) + 1] += offsets[static_cast<std::size_t>(digit)];
        for (const KeyIndexPair& kv : pairs)
            scratch[offsets[(kv.key >> shift) & 0xFFu]++] = kv;
        pairs.swap(scratch);
    }
}

// Radix-sorted (bucket key, point index) pairs of one normalized cloud.
// Immutable once built; shareable across threads. A dense per-bucket offset
// array is attached only when the grid is small relative to the cloud,
// otherwise lookups binary-search the sorted pairs.
struct SubdivTable {
    GridParams grid;
    std::vector<KeyIndexPair> pairs;
    std::vector<std::uint32_t> dense_offsets;  // size bucket_count+1 when present

    bool has_dense_offsets() const { return !dense_offsets.empty(); }
};

inline SubdivTable build_subdiv_table(const PointCloud& cloud_norm, const GridParams& grid,
                                      unsigned workers = 1) {
    SubdivTable table{grid, {}, {}};
    const std::size_t n_points = cloud_norm.size();
    table.pairs.resize(n_points);

    std::atomic<bool> out_of_range{false};
    parallel_for(n_points, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Point& p = cloud_norm[i];
            if (p.x < -1.0f || p.x > 1.0f || p.y < -1.0f || p.y > 1.0f || p.z < -1.0f ||
                p.z > 1.0f) {
                out_of_range.store(true, std::memory_order_relaxed);
                table.pairs[i] = {0, static_cast<std::uint32_t>(i)};
            } else {
                table.pairs[i] = {detail::bucket_key_unchecked(p, grid),
                                  static_cast<std::uint32_t>(i)};
            }
        }
    });
    if (out_of_range.load())
        throw ConfigError("build_subdiv_table: cloud is not normalized to [-1, 1]^3");

    radix_sort_pairs(table.pairs, grid.key_bits());

    // Dense offsets pay off only when buckets are not vastly more numerous
    // than points.
    const std::uint64_t buckets = grid.bucket_count();
    if (n_points > 0 && buckets <= 4 * static_cast<std::uint64_t>(n_points)) {
        table.dense_offsets.assign(buckets + 1, 0);
        for (const KeyIndexPair& kv : table.pairs)
            ++table.dense_offsets[kv.key + 1];
        for (std::uint64_t b = 0; b < buckets; ++b)
            table.dense_offsets[b + 1] += table.dense_offsets[b];
    }
    return table;
}

struct BucketRange {
    std::uint32_t start = 0;
    std::uint32_t count = 0;
};

namespace detail {

// Half-open run of pairs whose keys fall in [key_lo, key_hi]. Since keys are
// row-major, the three z-adjacent cells of a (x, y) column form one such run.
inline std::pair<std::uint32_t, std::uint32_t> pair_span(const SubdivTable& table,
                                                         BucketKey key_lo, BucketKey key_hi) {
    if (table.has_dense_offsets())
        return {table.dense_offsets[key_lo], table.dense_offsets[key_hi + 1]};
    const auto lo = std::lower_bound(table.pairs.begin(), table.pairs.end(), key_lo,
                                     [](const KeyIndexPair& kv, BucketKey k) { return kv.key < k; });
    const auto hi = std::upper_bound(lo, table.pairs.end(), key_hi,
                                     [](BucketKey k, const KeyIndexPair& kv) { return k < kv.key; });
    return {static_cast<std::uint32_t>(lo - table.pairs.begin()),
            static_cast<std::uint32_t>(hi - table.pairs.begin())};
}

}  // namespace detail

/// Run of pairs holding exactly `key`; count 0 when the bucket is empty.
inline BucketRange bucket_range(const SubdivTable& table, BucketKey key) {
    const auto [lo, hi] = detail::pair_span(table, key, key);
    return {lo, hi - lo};
}

/// Keys of all grid cells within one step of `key`'s cell on every axis,
/// clipped at the grid boundary; includes the center cell. 27 keys for an
/// interior cell, 8 at a corner. Ascending order.
inline std::vector<BucketKey> neighbor_buckets(BucketKey key, const GridParams& grid) {
    const auto [ix, iy, iz] = detail::decompose_key(key, grid.n);
    const std::int64_t cells = grid.cells_per_axis();
    std::vector<BucketKey> keys;
    keys.reserve(27);
    for (std::int64_t jx = std::int64_t{ix} - 1; jx <= std::int64_t{ix} + 1; ++jx) {
        if (jx < 0 || jx >= cells)
            continue;
        for (std::int64_t jy = std::int64_t{iy} - 1; jy <= std::int64_t{iy} + 1; ++jy) {
            if (jy < 0 || jy >= cells)
                continue;
            for (std::int64_t jz = std::int64_t{iz} - 1; jz <= std::int64_t{iz} + 1; ++jz) {
                if (jz < 0 || jz >= cells)
                    continue;
                keys.push_back(detail::compose_key(static_cast<std::uint32_t>(jx),
                                                   static_cast<std::uint32_t>(jy),
                                                   static_cast<std::uint32_t>(jz), grid.n));
            }
        }
    }
    return keys;
}

}  // namespace decim
