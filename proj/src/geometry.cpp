#include "hsu/geometry.hpp"

#include <algorithm>

namespace hsu {

Vec3 object_centroid(const std::vector<Vec3>& points) {
    if (points.empty())
        throw DomainError("object_centroid: empty point set");
    Vec3 sum;
    for (const auto& p : points) {
        if (!p.finite())
            throw DomainError("object_centroid: non-finite point");
        sum = sum + p;
    }
    return sum * (1.0 / static_cast<double>(points.size()));
}

std::pair<Vec3, std::vector<double>>
room_centroid_and_distances(const std::vector<Vec3>& object_centroids) {
    if (object_centroids.empty())
        throw DomainError("room_centroid_and_distances: empty scene");
    Vec3 c = object_centroid(object_centroids);
    std::vector<double> dists;
    dists.reserve(object_centroids.size());
    for (const auto& p : object_centroids)
        dists.push_back((p - c).norm());
    return {c, dists};
}

Aabb bounding_box(const std::vector<Vec3>& points) {
    if (points.empty())
        throw DomainError("bounding_box: empty point set");
    Aabb box{points.front(), points.front()};
    for (const auto& p : points) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.min.z = std::min(box.min.z, p.z);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
        box.max.z = std::max(box.max.z, p.z);
    }
    return box;
}

bool aabb_overlap(const Aabb& a, const Aabb& b) {
    return a.min.x <= b.max.x && b.min.x <= a.max.x &&
           a.min.y <= b.max.y && b.min.y <= a.max.y &&
           a.min.z <= b.max.z && b.min.z <= a.max.z;
}

} // namespace hsu
