#pragma once

#include <cstddef>
#include <vector>

#include "voxpyr/error.hpp"
#include "voxpyr/geometry.hpp"

namespace voxpyr {

/// Point set with optional per-point unit normals. Coordinates are unitless
/// after normalize_to_unit_cube; source_bounds keeps the raw-input box.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty, or one unit vector per point
    Box3 source_bounds;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }

    Box3 bounds() const {
        Box3 b;
        for (const Vec3& p : points) b.expand(p);
        return b;
    }
};

struct NormalizeResult {
    PointCloud cloud;
    bool degenerate = false;  // all input points identical
    double scale = 1.0;
    Vec3 offset;  // subtracted before scaling
};

/// Uniformly scale and translate so the tight bounding box fits [0,1]^3 with
/// the longest axis spanning exactly [0,1]. A degenerate cloud (all points
/// identical) is centered at (0.5,0.5,0.5) with scale 1 and flagged.
inline NormalizeResult normalize_to_unit_cube(const PointCloud& cloud) {
    if (cloud.empty()) throw error("normalize_to_unit_cube: empty cloud");

    NormalizeResult out;
    out.cloud.normals = cloud.normals;
    out.cloud.source_bounds = cloud.source_bounds.valid() ? cloud.source_bounds : cloud.bounds();
    out.cloud.points.reserve(cloud.size());

    const Box3 box = cloud.bounds();
    const double span = box.longest_extent();
    if (span <= 0.0) {
        out.degenerate = true;
        out.scale = 1.0;
        out.offset = box.lo - Vec3{0.5, 0.5, 0.5};
        out.cloud.points.assign(cloud.size(), Vec3{0.5, 0.5, 0.5});
        return out;
    }

    out.scale = 1.0 / span;
    out.offset = box.lo;
    for (const Vec3& p : cloud.points) out.cloud.points.push_back((p - box.lo) / span);
    return out;
}

}  // namespace voxpyr
