// Reference implementations: the centroid voxel-grid filter used as the
// timing baseline, plus single-threaded brute-force counterparts of the
// bucket filter. The brute-force routines share the radius predicate and RNG
// derivation with the bucket path but search neighbors by full scan, so the
// two routes must agree bit-exactly.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "decim/core.hpp"
#include "decim/decimate.hpp"
#include "decim/exec.hpp"
#include "decim/grid.hpp"
#include "decim/rng.hpp"

namespace decim {

struct LeafSize {
    float edge;  // meters, uniform per axis
};

/// Centroid voxel-grid downsampling: space is cut into cubes of the given
/// edge anchored at the cloud's AABB minimum, and each occupied cube emits
/// the arithmetic centroid of its points. Output is ordered by ascending
/// cell key. Centroids accumulate in double and are emitted in single
/// precision.
inline PointCloud voxel_centroid_filter(const PointCloud& cloud, LeafSize leaf) {
    if (cloud.empty())
        throw ConfigError("voxel_centroid_filter: input cloud is empty");
    if (!(leaf.edge > 0.0f))
        throw ConfigError("voxel_centroid_filter: leaf edge must be positive");

    const Aabb box = compute_aabb(cloud);
    const float inv_edge = 1.0f / leaf.edge;
    const auto cells_x = static_cast<std::int64_t>((box.max.x - box.min.x) * inv_edge) + 1;
    const auto cells_y = static_cast<std::int64_t>((box.max.y - box.min.y) * inv_edge) + 1;
    const auto cells_z = static_cast<std::int64_t>((box.max.z - box.min.z) * inv_edge) + 1;
    if (static_cast<double>(cells_x) * static_cast<double>(cells_y) *
            static_cast<double>(cells_z) >
        9.0e18)
        throw ConfigError("voxel_centroid_filter: leaf edge too small, cell keys would overflow");

    struct CellPoint {
        std::uint64_t key;
        std::uint32_t index;
    };
    std::vector<CellPoint> entries;
    entries.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Point& p = cloud[i];
        const auto ix = static_cast<std::uint64_t>(std::floor((p.x - box.min.x) * inv_edge));
        const auto iy = static_cast<std::uint64_t>(std::floor((p.y - box.min.y) * inv_edge));
        const auto iz = static_cast<std::uint64_t>(std::floor((p.z - box.min.z) * inv_edge));
        const std::uint64_t key =
            (ix * static_cast<std::uint64_t>(cells_y) + iy) * static_cast<std::uint64_t>(cells_z) +
            iz;
        entries.push_back({key, static_cast<std::uint32_t>(i)});
    }
    // sort ties by input index so double accumulation order is deterministic
    std::sort(entries.begin(), entries.end(), [](const CellPoint& a, const CellPoint& b) {
        return std::tie(a.key, a.index) < std::tie(b.key, b.index);
    });

    PointCloud out;
    std::size_t run = 0;
    while (run < entries.size()) {
        std::size_t end = run + 1;
        while (end < entries.size() && entries[end].key == entries[run].key)
            ++end;
        double sx = 0.0, sy = 0.0, sz = 0.0;
        for (std::size_t e = run; e < end; ++e) {
            const Point& p = cloud[entries[e].index];
            sx += p.x;
            sy += p.y;
            sz += p.z;
        }
        const auto count = static_cast<double>(end - run);
        out.points.push_back({static_cast<float>(sx / count), static_cast<float>(sy / count),
                              static_cast<float>(sz / count)});
        run = end;
    }
    return out;
}

/// Same contract as count_neighbors, found by scanning every point. Test
/// oracle for the bucket search.
inline std::size_t brute_force_neighbor_count(const PointCloud& cloud_norm, std::size_t idx,
                                              const NormalizationRecord& norm, float radius,
                                              const AliveMask& snapshot) {
    const auto test = detail::MetricRadiusTest::from(norm, radius);
    std::size_t found = 0;
    for (std::size_t j = 0; j < cloud_norm.size(); ++j) {
        if (j == idx || !snapshot[j])
            continue;
        if (test.within(cloud_norm[idx], cloud_norm[j]))
            ++found;
    }
    return found;
}

/// Sequential, bucket-free reference of decimate. Identical loop semantics,
/// snapshot rule, and RNG stream, so for any (cloud, cfg) the output matches
/// decimate bit-exactly.
inline DecimateResult brute_force_decimate(const PointCloud& cloud, const FilterConfig& cfg) {
    validate_config(cfg);
    if (cloud.empty())
        throw ConfigError("brute_force_decimate: input cloud is empty");

    FilterStats stats;
    stats.input_size = cloud.size();
    const double t_total = monotonic_seconds();

    double t = monotonic_seconds();
    const Aabb box = compute_aabb(cloud);
    auto [cloud_norm, rec] = normalize(cloud, box);
    stats.phases.normalize_s = monotonic_seconds() - t;

    detail::check_radius_fits_grid(rec, cfg);

    const auto test = detail::MetricRadiusTest::from(rec, cfg.radius);
    const auto cap = static_cast<std::size_t>(cfg.threshold) + 1;

    AliveMask alive(cloud.size(), 1);
    std::size_t deleted = 0;
    for (;;) {
        ++stats.passes;
        if (stats.passes > cfg.max_passes)
            throw Error("brute_force_decimate: max_passes exceeded");

        t = monotonic_seconds();
        std::vector<std::uint8_t> marked(cloud.size(), 0);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (!alive[i])
                continue;
            std::size_t found = 0;
            for (std::size_t j = 0; j < cloud.size(); ++j) {
                if (j == i || !alive[j])
                    continue;
                if (test.within(cloud_norm[i], cloud_norm[j]) && ++found >= cap)
                    break;
            }
            marked[i] = found > static_cast<std::size_t>(cfg.threshold);
        }
        stats.phases.mark_s += monotonic_seconds() - t;

        t = monotonic_seconds();
        const std::size_t marked_count = alive_count(marked);
        if (marked_count > cfg.batch_size) {
            SplitMix64 rng(cfg.seed ^ static_cast<std::uint64_t>(stats.passes));
            for (std::uint32_t idx : select_random_marked(marked, cfg.batch_size, rng))
                alive[idx] = 0;
            deleted += cfg.batch_size;
            stats.phases.select_s += monotonic_seconds() - t;
        } else {
            for (std::size_t i = 0; i < marked.size(); ++i)
                if (marked[i])
                    alive[i] = 0;
            deleted += marked_count;
            stats.phases.select_s += monotonic_seconds() - t;
            break;
        }
    }

    t = monotonic_seconds();
    PointCloud out;
    out.points.reserve(cloud.size() - deleted);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (alive[i])
            out.points.push_back(cloud[i]);
    stats.phases.compact_s = monotonic_seconds() - t;

    stats.deleted_total = deleted;
    stats.output_size = out.size();
    stats.phases.total_s = monotonic_seconds() - t_total;
    return {std::move(out), stats};
}

}  // namespace decim
