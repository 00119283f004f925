#pragma once

#include <cmath>
#include <vector>

#include "hsu/error.hpp"

namespace hsu {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

// Axis-aligned bounding box, closed intervals on all axes.
struct Aabb {
    Vec3 min;
    Vec3 max;

    bool valid() const {
        return min.x <= max.x && min.y <= max.y && min.z <= max.z;
    }
    bool operator==(const Aabb& o) const { return min == o.min && max == o.max; }
};

// Componentwise mean of a non-empty point set.
Vec3 object_centroid(const std::vector<Vec3>& points);

// Mean of the given object centroids plus each object's Euclidean distance
// to that mean, in input order.
std::pair<Vec3, std::vector<double>>
room_centroid_and_distances(const std::vector<Vec3>& object_centroids);

// Smallest AABB enclosing a non-empty point set.
Aabb bounding_box(const std::vector<Vec3>& points);

// True iff the closed boxes intersect on all three axes (touching counts).
bool aabb_overlap(const Aabb& a, const Aabb& b);

} // namespace hsu
