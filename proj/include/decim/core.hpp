// Core geometric types and elementary point-cloud operations.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace decim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or violated preconditions (bad ranges, empty input, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failures (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

struct Point {
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;

    friend bool operator==(const Point&, const Point&) = default;
};

inline bool is_finite(const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// Contiguous xyz cloud. Filters take this by const reference and allocate
// only their (compacted) result, never a copy of the input buffer.
struct PointCloud {
    std::vector<Point> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point> pts) : points(std::move(pts)) {}

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    const Point& operator[](std::size_t i) const { return points[i]; }
    Point& operator[](std::size_t i) { return points[i]; }

    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct Aabb {
    Point min;
    Point max;

    bool contains(const Point& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

/// Euclidean distance between two points.
inline float distance(const Point& a, const Point& b) {
    const float dx = b.x - a.x;
    const float dy = b.y - a.y;
    const float dz = b.z - a.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Componentwise bounding box of a nonempty cloud.
inline Aabb compute_aabb(const PointCloud& cloud) {
    if (cloud.empty())
        throw ConfigError("compute_aabb: empty cloud has no bounding box");
    Aabb box{cloud[0], cloud[0]};
    for (const Point& p : cloud.points) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.min.z = std::min(box.min.z, p.z);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
        box.max.z = std::max(box.max.z, p.z);
    }
    return box;
}

/// Keeps points with z_min <= z <= z_max, preserving input order.
inline PointCloud crop_z(const PointCloud& cloud, float z_min, float z_max) {
    if (z_min > z_max)
        throw ConfigError("crop_z: z_min exceeds z_max");
    PointCloud out;
    for (const Point& p : cloud.points)
        if (p.z >= z_min && p.z <= z_max)
            out.points.push_back(p);
    return out;
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<float, 9> m{};

    float operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    float& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    static Mat3 identity() {
        Mat3 id;
        id.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return id;
    }
};

inline bool is_orthonormal(const Mat3& r, float tol = 1e-5f) {
    // R * R^T == I, accumulated in double
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k)
                dot += static_cast<double>(r(i, k)) * static_cast<double>(r(j, k));
            const double expected = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot - expected) > tol)
                return false;
        }
    }
    return true;
}

/// Applies p' = R*p + t to every point.
inline PointCloud transform_rigid(const PointCloud& cloud, const Mat3& rotation,
                                  const Point& translation) {
    if (!is_orthonormal(rotation))
        throw ConfigError("transform_rigid: rotation matrix is not orthonormal");
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Point& p : cloud.points) {
        Point q;
        q.x = rotation(0, 0) * p.x + rotation(0, 1) * p.y + rotation(0, 2) * p.z + translation.x;
        q.y = rotation(1, 0) * p.x + rotation(1, 1) * p.y + rotation(1, 2) * p.z + translation.y;
        q.z = rotation(2, 0) * p.x + rotation(2, 1) * p.y + rotation(2, 2) * p.z + translation.z;
        out.points.push_back(q);
    }
    return out;
}

}  // namespace decim
