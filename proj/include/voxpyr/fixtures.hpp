#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "voxpyr/point_cloud.hpp"

namespace voxpyr {

/// Reproducible synthetic shapes for tests and benchmarks. Each generator is
/// deterministic in (n, seed); clouds come without normals so the pipeline's
/// estimation path is exercised.
namespace fixtures {

namespace detail {

inline Vec3 unit_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 v;
    do {
        v = {gauss(rng), gauss(rng), gauss(rng)};
    } while (v.squared_norm() < 1e-12);
    return v.normalized();
}

}  // namespace detail

/// Mostly-flat sheet: a lightly jittered interior plus a denser, rougher
/// border strip so the percentile thresholds have real structure to find.
inline PointCloud make_plane(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> jitter_interior(-0.004, 0.004);
    std::uniform_real_distribution<double> jitter_border(-0.02, 0.02);

    constexpr double kStrip = 0.125;  // two cells at R=16
    auto in_border = [&](double x, double y) {
        return x < kStrip || x > 1.0 - kStrip || y < kStrip || y > 1.0 - kStrip;
    };

    PointCloud cloud;
    cloud.points.reserve(n);
    const std::size_t base = n - n * 45 / 100;
    while (cloud.points.size() < base) {
        const double x = unit(rng), y = unit(rng);
        const double z = in_border(x, y) ? jitter_border(rng) : jitter_interior(rng);
        cloud.points.push_back({x, y, z});
    }
    // extra border mass
    while (cloud.points.size() < n) {
        double x = unit(rng), y = unit(rng);
        const int side = static_cast<int>(unit(rng) * 4.0);
        const double t = unit(rng) * kStrip;
        if (side == 0) x = t;
        else if (side == 1) x = 1.0 - t;
        else if (side == 2) y = t;
        else y = 1.0 - t;
        cloud.points.push_back({x, y, jitter_border(rng)});
    }
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

/// Points on a sphere of radius 0.5 with slight radial noise.
inline PointCloud make_sphere(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> radial(-0.003, 0.003);
    PointCloud cloud;
    cloud.points.reserve(n);
    const Vec3 center{0.5, 0.5, 0.5};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 dir = detail::unit_direction(rng);
        cloud.points.push_back(center + dir * (0.5 + radial(rng)));
    }
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

/// Cube surface with oversampled edges: flat faces merge, edge cells carry
/// genuinely linear and dihedral structure.
inline PointCloud make_cube_edges(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> edge_jitter(-0.006, 0.006);

    const double lo = 0.15, hi = 0.85;
    PointCloud cloud;
    cloud.points.reserve(n);

    const std::size_t face_points = n * 7 / 10;
    while (cloud.points.size() < face_points) {
        const int axis = static_cast<int>(unit(rng) * 3.0);
        const bool high = unit(rng) < 0.5;
        Vec3 p{lo + unit(rng) * (hi - lo), lo + unit(rng) * (hi - lo),
               lo + unit(rng) * (hi - lo)};
        p[axis] = high ? hi : lo;
        cloud.points.push_back(p);
    }
    // 12 edges: pick a pair of fixed axes, run along the third
    while (cloud.points.size() < n) {
        const int run_axis = static_cast<int>(unit(rng) * 3.0);
        const bool a_high = unit(rng) < 0.5;
        const bool b_high = unit(rng) < 0.5;
        Vec3 p;
        p[run_axis] = lo + unit(rng) * (hi - lo);
        const int a = (run_axis + 1) % 3, b = (run_axis + 2) % 3;
        p[a] = (a_high ? hi : lo) + edge_jitter(rng);
        p[b] = (b_high ? hi : lo) + edge_jitter(rng);
        cloud.points.push_back(p);
    }
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

/// Thin segment along the main diagonal.
inline PointCloud make_line(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.004, 0.004);
    PointCloud cloud;
    cloud.points.reserve(n);
    const Vec3 a{0.1, 0.1, 0.1}, b{0.9, 0.9, 0.9};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = unit(rng);
        cloud.points.push_back(a + (b - a) * t + Vec3{jitter(rng), jitter(rng), jitter(rng)});
    }
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

/// Composite of the four primitives placed in separate regions; mixes flat,
/// curved, linear, and edge-heavy structure in one cloud.
inline PointCloud make_mixed(std::size_t n, std::uint64_t seed) {
    auto place = [](PointCloud part, const Vec3& offset, double scale) {
        for (Vec3& p : part.points) p = offset + p * scale;
        return part;
    };
    const PointCloud plane = place(make_plane(n * 4 / 10, seed + 1), {0.0, 0.0, 0.05}, 0.45);
    const PointCloud sphere = place(make_sphere(n * 3 / 10, seed + 2), {0.5, 0.5, 0.5}, 0.45);
    const PointCloud cube = place(make_cube_edges(n * 15 / 100, seed + 3), {0.0, 0.55, 0.5}, 0.45);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (const PointCloud* part : {&plane, &sphere, &cube})
        cloud.points.insert(cloud.points.end(), part->points.begin(), part->points.end());
    const PointCloud line = place(make_line(n - cloud.points.size(), seed + 4),
                                  {0.55, 0.0, 0.0}, 0.45);
    cloud.points.insert(cloud.points.end(), line.points.begin(), line.points.end());
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

inline std::vector<std::pair<std::string, PointCloud>> make_suite(std::size_t n,
                                                                  std::uint64_t seed) {
    return {
        {"plane", make_plane(n, seed)},
        {"sphere", make_sphere(n, seed + 100)},
        {"cube_edges", make_cube_edges(n, seed + 200)},
        {"line", make_line(n, seed + 300)},
        {"mixed", make_mixed(n, seed + 400)},
    };
}

}  // namespace fixtures
}  // namespace voxpyr
