// Iterative density filter over the bucket grid: count neighbors inside a
// metric radius through the 27 surrounding cells, mark points whose count
// exceeds the threshold, delete marked points in random batches until a pass
// marks no more than one batch, then delete the remainder and compact.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "decim/core.hpp"
#include "decim/exec.hpp"
#include "decim/grid.hpp"
#include "decim/rng.hpp"

namespace decim {

struct FilterConfig {
    int n = 6;                        // grid subdivision exponent
    float radius = 0.05f;             // neighbor distance threshold, meters
    int threshold = 0;                // max tolerated neighbor count
    std::size_t batch_size = 1000;    // marked points deleted per pass
    std::uint64_t seed = 0;           // RNG seed; pass k draws from seed ^ k (k 1-based)
    std::size_t max_passes = 10000;   // defensive cap, unreachable given progress
};

inline void validate_config(const FilterConfig& cfg) {
    if (!(cfg.radius > 0.0f))
        throw ConfigError("FilterConfig: radius must be positive");
    if (cfg.threshold < 0)
        throw ConfigError("FilterConfig: threshold must be nonnegative");
    if (cfg.batch_size < 1)
        throw ConfigError("FilterConfig: batch_size must be at least 1");
    if (cfg.max_passes < 1)
        throw ConfigError("FilterConfig: max_passes must be at least 1");
    GridParams check(cfg.n);
    (void)check;
}

// Survivorship bitmap; deletion stays lazy in this mask until the final
// compaction. One byte per point so parallel writers never share an element.
using AliveMask = std::vector<std::uint8_t>;

inline std::size_t alive_count(const AliveMask& mask) {
    std::size_t n = 0;
    for (std::uint8_t a : mask)
        n += a != 0;
    return n;
}

struct FilterStats {
    std::size_t passes = 0;
    std::size_t deleted_total = 0;
    std::size_t input_size = 0;
    std::size_t output_size = 0;
    struct Phases {
        double normalize_s = 0.0;
        double build_table_s = 0.0;
        double mark_s = 0.0;
        double select_s = 0.0;
        double compact_s = 0.0;
        double total_s = 0.0;
    } phases;
};

/// Largest neighbor radius (meters) the 27-bucket search supports for this
/// normalization at exponent n: the metric edge of one grid cell on its
/// tightest non-degenerate axis. Infinity when every axis is degenerate.
inline float max_admissible_radius(const NormalizationRecord& rec, int n) {
    const float cells = static_cast<float>(std::uint32_t{1} << n);
    float best = std::numeric_limits<float>::infinity();
    for (float half : {rec.half_extent.x, rec.half_extent.y, rec.half_extent.z})
        if (half > 0.0f)
            best = std::min(best, 2.0f * half / cells);
    return best;
}

inline float max_admissible_radius(const Aabb& box, int n) {
    return max_admissible_radius(NormalizationRecord::from_box(box), n);
}

namespace detail {

// Metric Euclidean ball test evaluated on normalized coordinates: each delta
// is scaled back by its axis half-extent, giving the distance in meters.
// Shared by the bucket filter and the brute-force oracle so both take
// bit-identical accept/reject decisions.
struct MetricRadiusTest {
    float scale_x, scale_y, scale_z;
    float radius_sq;

    static MetricRadiusTest from(const NormalizationRecord& rec, float radius) {
        return {rec.half_extent.x, rec.half_extent.y, rec.half_extent.z, radius * radius};
    }

    bool within(const Point& a_norm, const Point& b_norm) const {
        const float dx = (a_norm.x - b_norm.x) * scale_x;
        const float dy = (a_norm.y - b_norm.y) * scale_y;
        const float dz = (a_norm.z - b_norm.z) * scale_z;
        return dx * dx + dy * dy + dz * dz <= radius_sq;
    }
};

inline void check_radius_fits_grid(const NormalizationRecord& rec, const FilterConfig& cfg) {
    const float limit = max_admissible_radius(rec, cfg.n);
    if (cfg.radius > limit)
        throw ConfigError(
            "decimate: radius " + std::to_string(cfg.radius) + " m exceeds the grid cell edge " +
            std::to_string(limit) +
            " m, so the 27-bucket neighborhood would miss neighbors; reduce the radius or use "
            "a smaller subdivision exponent n");
}

// Counts alive neighbors of point `idx`, stopping once `cap` are found. The
// three z-adjacent cells of each (x, y) column are one contiguous key run,
// so the 27-cell neighborhood costs at most nine range lookups.
inline std::size_t count_neighbors_up_to(std::size_t idx, std::size_t cap,
                                         const PointCloud& cloud_norm, const SubdivTable& table,
                                         const MetricRadiusTest& test,
                                         const AliveMask& snapshot) {
    if (cap == 0)
        return 0;
    const Point p = cloud_norm[idx];
    const std::uint32_t cells = table.grid.cells_per_axis();
    const std::uint32_t ix = cell_index(p.x, cells);
    const std::uint32_t iy = cell_index(p.y, cells);
    const std::uint32_t iz = cell_index(p.z, cells);
    const std::uint32_t x0 = ix > 0 ? ix - 1 : 0, x1 = std::min(ix + 1, cells - 1);
    const std::uint32_t y0 = iy > 0 ? iy - 1 : 0, y1 = std::min(iy + 1, cells - 1);
    const std::uint32_t z0 = iz > 0 ? iz - 1 : 0, z1 = std::min(iz + 1, cells - 1);

    std::size_t found = 0;
    for (std::uint32_t jx = x0; jx <= x1; ++jx) {
        for (std::uint32_t jy = y0; jy <= y1; ++jy) {
            const auto [begin, end] = pair_span(table, compose_key(jx, jy, z0, table.grid.n),
                                                compose_key(jx, jy, z1, table.grid.n));
            for (std::uint32_t e = begin; e < end; ++e) {
                const std::uint32_t j = table.pairs[e].index;
                if (j == idx || !snapshot[j])
                    continue;
                if (test.within(p, cloud_norm[j]) && ++found >= cap)
                    return found;
            }
        }
    }
    return found;
}

}  // namespace detail

/// Number of alive points other than `idx` within cfg.radius of it, found by
/// scanning only the <= 27 neighbor buckets of its cell. The snapshot decides
/// survivorship; snapshot[idx] must be true.
inline std::size_t count_neighbors(std::size_t idx, const PointCloud& cloud_norm,
                                   const SubdivTable& table, const NormalizationRecord& norm,
                                   const FilterConfig& cfg, const AliveMask& snapshot) {
    const auto test = detail::MetricRadiusTest::from(norm, cfg.radius);
    return detail::count_neighbors_up_to(idx, std::numeric_limits<std::size_t>::max(), cloud_norm,
                                         table, test, snapshot);
}

/// One marking sweep: for every surviving point, marked <=> neighbor count
/// exceeds cfg.threshold. All counts read the same immutable snapshot, so the
/// result is independent of evaluation order and worker count.
inline std::vector<std::uint8_t> mark_pass(const PointCloud& cloud_norm, const SubdivTable& table,
                                           const NormalizationRecord& norm,
                                           const FilterConfig& cfg, const AliveMask& snapshot,
                                           unsigned workers = 1) {
    std::vector<std::uint8_t> marked(cloud_norm.size(), 0);
    const auto test = detail::MetricRadiusTest::from(norm, cfg.radius);
    const auto cap = static_cast<std::size_t>(cfg.threshold) + 1;
    parallel_for(cloud_norm.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (!snapshot[i])
                continue;
            // counting can stop at threshold+1: only count > threshold matters
            marked[i] =
                detail::count_neighbors_up_to(i, cap, cloud_norm, table, test, snapshot) >
                static_cast<std::size_t>(cfg.threshold);
        }
    });
    return marked;
}

/// Draws exactly batch_size distinct marked indices via a partial
/// Fisher-Yates shuffle of the ascending marked-index list. Reproducible for
/// a given rng state and thread-count independent. The marked count must
/// exceed batch_size.
inline std::vector<std::uint32_t> select_random_marked(const std::vector<std::uint8_t>& marked,
                                                       std::size_t batch_size, SplitMix64& rng) {
    std::vector<std::uint32_t> candidates;
    for (std::size_t i = 0; i < marked.size(); ++i)
        if (marked[i])
            candidates.push_back(static_cast<std::uint32_t>(i));
    if (candidates.size() <= batch_size)
        throw std::logic_error("select_random_marked: marked count must exceed batch_size");
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t j = i + rng.next_below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(batch_size);
    return candidates;
}

struct DecimateResult {
    PointCloud cloud;
    FilterStats stats;
};

/// Full filter driver: normalize, build the subdivision table, then repeat
/// { mark; if more than batch_size marked, delete a random batch and rerun;
/// otherwise delete all marked and stop }. Survivors keep their original
/// coordinates and relative order. Output is fully determined by (cloud,
/// cfg) regardless of the worker count.
inline DecimateResult decimate(const PointCloud& cloud, const FilterConfig& cfg,
                               unsigned threads = 0) {
    validate_config(cfg);
    if (cloud.empty())
        throw ConfigError("decimate: input cloud is empty");
    const unsigned workers = resolve_thread_count(threads);

    FilterStats stats;
    stats.input_size = cloud.size();
    const double t_total = monotonic_seconds();

    double t = monotonic_seconds();
    const Aabb box = compute_aabb(cloud);
    auto [cloud_norm, rec] = normalize(cloud, box);
    stats.phases.normalize_s = monotonic_seconds() - t;

    detail::check_radius_fits_grid(rec, cfg);

    t = monotonic_seconds();
    const SubdivTable table = build_subdiv_table(cloud_norm, GridParams(cfg.n), workers);
    stats.phases.build_table_s = monotonic_seconds() - t;

    AliveMask alive(cloud.size(), 1);
    std::size_t deleted = 0;
    for (;;) {
        ++stats.passes;
        if (stats.passes > cfg.max_passes)
            throw Error("decimate: max_passes exceeded");

        t = monotonic_seconds();
        const std::vector<std::uint8_t> marked =
            mark_pass(cloud_norm, table, rec, cfg, alive, workers);
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
