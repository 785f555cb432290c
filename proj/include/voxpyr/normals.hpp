#pragma once

#include <string>
#include <vector>

#include "voxpyr/parallel.hpp"
#include "voxpyr/point_cloud.hpp"
#include "voxpyr/spatial_hash.hpp"
#include "voxpyr/sym_eigen.hpp"

namespace voxpyr {

/// Per-point normals from the covariance of the k nearest neighbors (the
/// query point counts as its own nearest). The normal is the smallest
/// eigenvector, flipped to point away from the neighborhood centroid so
/// orientation is locally consistent. Each point depends only on its own
/// neighbor set, so any thread count gives identical output.
inline PointCloud estimate_normals(const PointCloud& cloud, int k, int threads = 1) {
    if (k < 3) throw usage_error("estimate_normals: k must be >= 3");
    if (cloud.size() < static_cast<std::size_t>(k))
        throw usage_error("estimate_normals: cloud has " + std::to_string(cloud.size()) +
                          " points but k=" + std::to_string(k) + "; lower k");

    UniformGridIndex index(cloud.points);
    PointCloud out = cloud;
    out.normals.assign(cloud.size(), Vec3{});

    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const std::vector<int> nb = index.knn(cloud.points[i], k);
        Vec3 centroid;
        for (int j : nb) centroid += cloud.points[static_cast<std::size_t>(j)];
        centroid = centroid / static_cast<double>(nb.size());

        const SymMat3 cov = covariance3(nb.size(), [&](std::size_t s) {
            return cloud.points[static_cast<std::size_t>(nb[s])];
        });
        Vec3 n = sym_eigen3(cov).smallest;
        if (n.dot(cloud.points[i] - centroid) < 0.0) n = n * -1.0;
        out.normals[i] = n;
    });
    return out;
}

}  // namespace voxpyr
