// Synthetic test clouds. All scenes are produced by a single seeded stream,
// so a given SceneSpec always yields the same cloud on every platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "decim/core.hpp"
#include "decim/rng.hpp"

namespace decim {

enum class SceneKind {
    corridor,           // floor, two side walls and a few box obstacles
    uniform_box,        // uniform fill of the extent box
    gaussian_clusters,  // eight blobs at fixed random centers
};

struct SceneSpec {
    SceneKind kind = SceneKind::corridor;
    Point extents{20.0f, 2.0f, 2.5f};  // meters along x, y, z
    std::size_t point_count = 0;
    float noise_sigma = 0.0f;  // corridor/uniform: jitter; clusters: blob spread
    std::uint64_t seed = 1;
};

inline SceneKind parse_scene_kind(const std::string& name) {
    if (name == "corridor")
        return SceneKind::corridor;
    if (name == "uniform-box")
        return SceneKind::uniform_box;
    if (name == "gaussian-clusters")
        return SceneKind::gaussian_clusters;
    throw ConfigError("unknown scene kind '" + name +
                      "', expected corridor, uniform-box or gaussian-clusters");
}

inline std::string to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::corridor:
        return "corridor";
    case SceneKind::uniform_box:
        return "uniform-box";
    case SceneKind::gaussian_clusters:
        return "gaussian-clusters";
    }
    return "?";
}

namespace detail {

// Axis-aligned rectangle: origin plus two perpendicular edge vectors.
struct SurfaceRect {
    Point origin;
    Point edge_u;
    Point edge_v;
};

inline float rect_area(const SurfaceRect& r) {
    const auto len = [](const Point& e) {
        return std::sqrt(e.x * e.x + e.y * e.y + e.z * e.z);
    };
    return len(r.edge_u) * len(r.edge_v);
}

inline Point rect_at(const SurfaceRect& r, float s, float t) {
    return Point{r.origin.x + s * r.edge_u.x + t * r.edge_v.x,
                 r.origin.y + s * r.edge_u.y + t * r.edge_v.y,
                 r.origin.z + s * r.edge_u.z + t * r.edge_v.z};
}

inline float uniform_in(SplitMix64& rng, float lo, float hi) {
    return lo + static_cast<float>(rng.next_double01()) * (hi - lo);
}

// Standard normal via Box-Muller; one value per call keeps the draw order
// trivially reproducible.
inline float standard_normal(SplitMix64& rng) {
    const double u1 = 1.0 - rng.next_double01();  // in (0, 1], log stays finite
    const double u2 = rng.next_double01();
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(2.0 * 3.14159265358979323846 * u2));
}

// The corridor obstacles consume a fixed number of draws before any point is
// sampled, so the obstacle layout only depends on the seed.
inline void corridor_rects(const SceneSpec& spec, SplitMix64& rng,
                           std::vector<SurfaceRect>& rects, std::vector<Aabb>* boxes) {
    const float L = spec.extents.x, W = spec.extents.y, H = spec.extents.z;
    rects.push_back({{0, 0, 0}, {L, 0, 0}, {0, W, 0}});  // floor
    rects.push_back({{0, 0, 0}, {L, 0, 0}, {0, 0, H}});  // wall at y = 0
    rects.push_back({{0, W, 0}, {L, 0, 0}, {0, 0, H}});  // wall at y = W
    for (int k = 0; k < 4; ++k) {
        const float cx = uniform_in(rng, 0.15f * L, 0.85f * L);
        const float cy = uniform_in(rng, 0.25f * W, 0.75f * W);
        const float half_x = uniform_in(rng, 0.04f, 0.10f) * W;
        const float half_y = uniform_in(rng, 0.04f, 0.10f) * W;
        const float top = uniform_in(rng, 0.2f, 0.6f) * H;
        const float x0 = std::max(0.0f, cx - half_x), x1 = std::min(L, cx + half_x);
        const float y0 = std::max(0.0f, cy - half_y), y1 = std::min(W, cy + half_y);
        const float dx = x1 - x0, dy = y1 - y0;
        rects.push_back({{x0, y0, 0}, {0, dy, 0}, {0, 0, top}});    // face x = x0
        rects.push_back({{x1, y0, 0}, {0, dy, 0}, {0, 0, top}});    // face x = x1
        rects.push_back({{x0, y0, 0}, {dx, 0, 0}, {0, 0, top}});    // face y = y0
        rects.push_back({{x0, y1, 0}, {dx, 0, 0}, {0, 0, top}});    // face y = y1
        rects.push_back({{x0, y0, top}, {dx, 0, 0}, {0, dy, 0}});   // lid
        if (boxes)
            boxes->push_back({{x0, y0, 0}, {x1, y1, top}});
    }
}

}  // namespace detail

/// Boxes that contain every point the scene can emit at noise_sigma == 0.
/// Useful as a containment check on generated clouds.
inline std::vector<Aabb> scene_surface_boxes(const SceneSpec& spec) {
    const Aabb full{{0, 0, 0}, spec.extents};
    if (spec.kind != SceneKind::corridor)
        return {full};
    std::vector<Aabb> boxes{full};
    SplitMix64 rng(spec.seed);
    std::vector<detail::SurfaceRect> rects;
    detail::corridor_rects(spec, rng, rects, &boxes);
    return boxes;
}

inline PointCloud gen_synthetic(const SceneSpec& spec) {
    if (spec.extents.x < 0 || spec.extents.y < 0 || spec.extents.z < 0)
        throw ConfigError("gen_synthetic: extents must be nonnegative");
    if (spec.noise_sigma < 0)
        throw ConfigError("gen_synthetic: noise_sigma must be nonnegative");

    SplitMix64 rng(spec.seed);
    PointCloud cloud;
    cloud.points.reserve(spec.point_count);

    switch (spec.kind) {
    case SceneKind::corridor: {
        std::vector<detail::SurfaceRect> rects;
        detail::corridor_rects(spec, rng, rects, nullptr);
        std::vector<double> cumulative;
        double total = 0.0;
        for (const auto& r : rects) {
            total += detail::rect_area(r);
            cumulative.push_back(total);
        }
        for (std::size_t i = 0; i < spec.point_count; ++i) {
            const double pick = rng.next_double01() * total;
            std::size_t ri = 0;
            while (ri + 1 < cumulative.size() && pick >= cumulative[ri])
                ++ri;
            const float s = static_cast<float>(rng.next_double01());
            const float t = static_cast<float>(rng.next_double01());
            Point p = detail::rect_at(rects[ri], s, t);
            if (spec.noise_sigma > 0) {
                p.x += spec.noise_sigma * detail::standard_normal(rng);
                p.y += spec.noise_sigma * detail::standard_normal(rng);
                p.z += spec.noise_sigma * detail::standard_normal(rng);
            }
            cloud.points.push_back(p);
        }
        break;
    }
    case SceneKind::uniform_box: {
        for (std::size_t i = 0; i < spec.point_count; ++i) {
            Point p{detail::uniform_in(rng, 0, spec.extents.x),
                    detail::uniform_in(rng, 0, spec.extents.y),
                    detail::uniform_in(rng, 0, spec.extents.z)};
            if (spec.noise_sigma > 0) {
                p.x += spec.noise_sigma * detail::standard_normal(rng);
                p.y += spec.noise_sigma * detail::standard_normal(rng);
                p.z += spec.noise_sigma * detail::standard_normal(rng);
            }
            cloud.points.push_back(p);
        }
        break;
    }
    case SceneKind::gaussian_clusters: {
        constexpr int kClusters = 8;
        Point centers[kClusters];
        for (auto& c : centers)
            c = Point{detail::uniform_in(rng, 0, spec.extents.x),
                      detail::uniform_in(rng, 0, spec.extents.y),
                      detail::uniform_in(rng, 0, spec.extents.z)};
        const float sigma = spec.noise_sigma > 0 ? spec.noise_sigma : 0.1f;
        for (std::size_t i = 0; i < spec.point_count; ++i) {
            const Point& c = centers[rng.next_below(kClusters)];
            cloud.points.push_back(Point{c.x + sigma * detail::standard_normal(rng),
                                         c.y + sigma * detail::standard_normal(rng),
                                         c.z + sigma * detail::standard_normal(rng)});
        }
        break;
    }
    }
    return cloud;
}

}  // namespace decim
