#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "voxpyr/parallel.hpp"
#include "voxpyr/sym_eigen.hpp"
#include "voxpyr/voxel_grid.hpp"

namespace voxpyr {

/// Per-metric thresholds tau_m at a common percentile of the per-cell
/// distributions.
struct ThresholdSet {
    std::array<double, kMetricCount> tau{};
    double percentile = 75.0;
    std::size_t population_size = 0;

    double value(Metric m) const { return tau[static_cast<int>(m)]; }
};

/// Points per unit volume, n / V_voxel.
inline double point_density(const VoxelCell& cell) {
    if (cell.empty()) throw error("point_density: empty cell; skip empty cells");
    return cell.point_count() / cell.volume;
}

struct RoughnessResult {
    double sigma = 0.0;
    bool degenerate = false;  // < 3 points
};

/// RMS distance to the total-least-squares plane (through the centroid,
/// normal = smallest covariance eigenvector).
inline RoughnessResult surface_roughness(const VoxelCell& cell, const PointCloud& cloud) {
    if (cell.point_count() < 3) return {0.0, true};

    Vec3 centroid;
    for (int pi : cell.point_indices) centroid += cloud.points[static_cast<std::size_t>(pi)];
    centroid = centroid / cell.point_count();

    const SymMat3 cov = covariance3(cell.point_indices.size(), [&](std::size_t s) {
        return cloud.points[static_cast<std::size_t>(cell.point_indices[s])];
    });
    const Vec3 normal = sym_eigen3(cov).smallest;

    double sum_sq = 0.0;
    for (int pi : cell.point_indices) {
        const double d = (cloud.points[static_cast<std::size_t>(pi)] - centroid).dot(normal);
        sum_sq += d * d;
    }
    return {std::sqrt(sum_sq / cell.point_count()), false};
}

/// 1 - cos(theta), where cos(theta) is the mean dot product of the cell's
/// normals with their normalized average. A vanishing average (antipodal
/// normals) counts as full variation.
inline double normal_variation(const VoxelCell& cell, const PointCloud& cloud) {
    if (!cloud.has_normals())
        throw error("normal_variation: cloud has no normals; run estimate_normals first");
    if (cell.empty()) throw error("normal_variation: empty cell");

    Vec3 mean;
    for (int pi : cell.point_indices) mean += cloud.normals[static_cast<std::size_t>(pi)];
    mean = mean / cell.point_count();
    if (mean.norm() < 1e-12) return 1.0;
    const Vec3 avg = mean.normalized();

    double cos_theta = 0.0;
    for (int pi : cell.point_indices)
        cos_theta += cloud.normals[static_cast<std::size_t>(pi)].dot(avg);
    cos_theta /= cell.point_count();
    // rounding can push cos(theta) past +-1 for unit normals
    return std::clamp(1.0 - cos_theta, 0.0, 2.0);
}

struct PcaFeatures {
    double linearity = 0.0;
    double planarity = 0.0;
    double curvature = 0.0;
    bool degenerate = false;  // < 3 points or all points identical
};

/// Eigenvalue shape features of the cell covariance: (l1-l2)/l1,
/// (l2-l3)/l1 and l3/(l1+l2+l3), eigenvalues clamped at zero.
inline PcaFeatures pca_features(const VoxelCell& cell, const PointCloud& cloud) {
    if (cell.point_count() < 3) return {0.0, 0.0, 0.0, true};

    const SymMat3 cov = covariance3(cell.point_indices.size(), [&](std::size_t s) {
        return cloud.points[static_cast<std::size_t>(cell.point_indices[s])];
    });
    auto eig = sym_eigen3(cov).values;
    const double l1 = std::max(eig[0], 0.0);
    const double l2 = std::max(eig[1], 0.0);
    const double l3 = std::max(eig[2], 0.0);
    if (l1 <= 0.0) return {0.0, 0.0, 0.0, true};
    return {(l1 - l2) / l1, (l2 - l3) / l1, l3 / (l1 + l2 + l3), false};
}

/// Shannon entropy (nats) of the point distribution over the cell's eight
/// sub-octants; 0 log 0 = 0.
inline double spatial_entropy(const VoxelCell& cell, const PointCloud& cloud, int resolution) {
    if (cell.empty()) throw error("spatial_entropy: empty cell");

    const Vec3 mid{(cell.index.i + 0.5) / resolution, (cell.index.j + 0.5) / resolution,
                   (cell.index.k + 0.5) / resolution};
    std::array<int, 8> counts{};
    for (int pi : cell.point_indices) {
        const Vec3& p = cloud.points[static_cast<std::size_t>(pi)];
        const int b = (p.x >= mid.x ? 1 : 0) | (p.y >= mid.y ? 2 : 0) | (p.z >= mid.z ? 4 : 0);
        ++counts[static_cast<std::size_t>(b)];
    }
    const double n = cell.point_count();
    double h = 0.0;
    for (int c : counts) {
        if (c == 0) continue;
        const double pb = c / n;
        h -= pb * std::log(pb);
    }
    return h;
}

/// All seven scores for one cell. Degenerate cells keep the PCA-based
/// metrics and roughness at zero.
inline ComplexityMetrics compute_cell_metrics(const VoxelCell& cell, const PointCloud& cloud,
                                              int resolution) {
    ComplexityMetrics m;
    m.density = point_density(cell);
    m.entropy = spatial_entropy(cell, cloud, resolution);
    m.normal_variation = normal_variation(cell, cloud);

    const PcaFeatures pca = pca_features(cell, cloud);
    m.degenerate = pca.degenerate;
    if (!pca.degenerate) {
        m.linearity = pca.linearity;
        m.planarity = pca.planarity;
        m.curvature = pca.curvature;
        m.roughness = surface_roughness(cell, cloud).sigma;
    }
    return m;
}

/// Fills cell.metrics for every occupied cell. Cells are independent, so the
/// result does not depend on the thread count.
inline void compute_metrics(VoxelGrid& grid, const PointCloud& cloud, int threads = 1) {
    std::vector<VoxelCell*> occupied;
    occupied.reserve(grid.occupied_cell_count());
    for (auto& [idx, cell] : grid.cells())
        if (!cell.empty()) occupied.push_back(&cell);

    parallel_for(occupied.size(), threads, [&](std::size_t s) {
        occupied[s]->metrics = compute_cell_metrics(*occupied[s], cloud, grid.resolution());
    });
}

namespace detail {

/// Percentile by linear interpolation between closest order statistics
/// (inclusive convention); values need not be pre-sorted.
inline double percentile_interp(std::vector<double> values, double pct) {
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace detail

/// tau_m at the configured percentile of the metric distribution over
/// occupied, non-degenerate cells. fixed_thresholds in the config override
/// per metric.
inline ThresholdSet compute_thresholds(const VoxelGrid& grid, const GridConfig& config) {
    std::array<std::vector<double>, kMetricCount> samples;
    for (const auto& [idx, cell] : grid.cells()) {
        if (cell.empty()) continue;
        if (!cell.metrics) throw error("compute_thresholds: metrics missing; run compute_metrics");
        if (cell.metrics->degenerate) continue;
        for (int m = 0; m < kMetricCount; ++m)
            samples[static_cast<std::size_t>(m)].push_back(
                cell.metrics->value(static_cast<Metric>(m)));
    }
    const std::size_t population = samples[0].size();
    if (population == 0)
        throw error("compute_thresholds: no eligible (occupied, non-degenerate) cells");

    ThresholdSet out;
    out.percentile = config.percentile;
    out.population_size = population;
    for (int m = 0; m < kMetricCount; ++m) {
        const auto& override_value = config.fixed_thresholds[static_cast<std::size_t>(m)];
        out.tau[static_cast<std::size_t>(m)] =
            override_value ? *override_value
                           : detail::percentile_interp(samples[static_cast<std::size_t>(m)],
                                                       config.percentile);
    }
    return out;
}

/// Labels every cell: complex when any metric reaches its threshold,
/// non_complex otherwise. Degenerate cells carry almost no structure and are
/// complex only if density alone reaches tau_d.
inline void classify_voxels(VoxelGrid& grid, const ThresholdSet& thresholds) {
    for (auto& [idx, cell] : grid.cells()) {
        if (cell.empty()) {
            cell.label = CellLabel::empty;
            continue;
        }
        if (!cell.metrics) throw error("classify_voxels: metrics missing; run compute_metrics");
        const ComplexityMetrics& m = *cell.metrics;
        bool complex_cell;
        if (m.degenerate) {
            complex_cell = m.density >= thresholds.value(Metric::density);
        } else {
            complex_cell = false;
            for (int i = 0; i < kMetricCount; ++i) {
                const Metric metric = static_cast<Metric>(i);
                if (m.value(metric) >= thresholds.value(metric)) {
                    complex_cell = true;
                    break;
                }
            }
        }
        cell.label = complex_cell ? CellLabel::complex : CellLabel::non_complex;
    }
}

/// CSV dump, one row per occupied cell:
/// i,j,k,n,d,sigma_s,normal_variation,lambda_linear,lambda_planar,H_s,kappa,label
inline void write_metrics_csv(const VoxelGrid& grid, std::ostream& os) {
    os << "i,j,k,n,d,sigma_s,normal_variation,lambda_linear,lambda_planar,H_s,kappa,label\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return std::string(buf);
    };
    for (const auto& [idx, cell] : grid.cells()) {
        if (cell.empty()) continue;
        const ComplexityMetrics m = cell.metrics.value_or(ComplexityMetrics{});
        os << idx.i << ',' << idx.j << ',' << idx.k << ',' << cell.point_count() << ','
           << num(m.density) << ',' << num(m.roughness) << ',' << num(m.normal_variation) << ','
           << num(m.linearity) << ',' << num(m.planarity) << ',' << num(m.entropy) << ','
           << num(m.curvature) << ',' << label_name(cell.label) << '\n';
    }
}

}  // namespace voxpyr
