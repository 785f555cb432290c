#pragma once

// Independent brute-force implementations used as test oracles. These must
// stay decoupled from the library's computation paths: eigenvalues come from
// Jacobi sweeps instead of the closed form, nearest neighbors from full
// scans instead of the grid index, and so on.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "voxpyr/geometry.hpp"
#include "voxpyr/point_cloud.hpp"
#include "voxpyr/pyramid.hpp"
#include "voxpyr/voxel_grid.hpp"

namespace oracle {

using voxpyr::Vec3;

// --- eigen ------------------------------------------------------------

struct Jacobi3 {
    std::array<double, 3> values;        // descending
    std::array<Vec3, 3> vectors;         // matching columns
};

/// Cyclic Jacobi rotations on a symmetric 3x3 matrix.
inline Jacobi3 jacobi_eigen(double a00, double a01, double a02, double a11, double a12,
                            double a22) {
    double a[3][3] = {{a00, a01, a02}, {a01, a11, a12}, {a02, a12, a22}};
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off == 0.0) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
    }

    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
    Jacobi3 out;
    for (int i = 0; i < 3; ++i) {
        out.values[static_cast<std::size_t>(i)] = a[order[static_cast<std::size_t>(i)]][order[static_cast<std::size_t>(i)]];
        out.vectors[static_cast<std::size_t>(i)] = {v[0][order[static_cast<std::size_t>(i)]],
                                                    v[1][order[static_cast<std::size_t>(i)]],
                                                    v[2][order[static_cast<std::size_t>(i)]]};
    }
    return out;
}

inline Jacobi3 jacobi_covariance(const std::vector<Vec3>& pts) {
    Vec3 mean;
    for (const Vec3& p : pts) mean += p;
    mean = mean / static_cast<double>(pts.size());
    double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
    for (const Vec3& p : pts) {
        const Vec3 d = p - mean;
        a00 += d.x * d.x;
        a01 += d.x * d.y;
        a02 += d.x * d.z;
        a11 += d.y * d.y;
        a12 += d.y * d.z;
        a22 += d.z * d.z;
    }
    const double inv = 1.0 / static_cast<double>(pts.size());
    return jacobi_eigen(a00 * inv, a01 * inv, a02 * inv, a11 * inv, a12 * inv, a22 * inv);
}

// --- per-metric direct formulas ----------------------------------------

struct CellMetricsOracle {
    double density, roughness, normal_variation, linearity, planarity, entropy, curvature;
    bool degenerate;
};

/// Direct evaluation of all seven complexity formulas on one cell's points,
/// Jacobi eigenvalues and a histogram entropy.
inline CellMetricsOracle cell_metrics(const std::vector<Vec3>& pts,
                                      const std::vector<Vec3>& normals, const Vec3& cell_lo,
                                      double cell_edge) {
    CellMetricsOracle m{};
    const double n = static_cast<double>(pts.size());
    m.density = n / (cell_edge * cell_edge * cell_edge);

    // entropy over the 8 sub-octants
    const Vec3 mid = cell_lo + Vec3{cell_edge / 2, cell_edge / 2, cell_edge / 2};
    std::array<double, 8> hist{};
    for (const Vec3& p : pts) {
        const int b = (p.x >= mid.x ? 1 : 0) + (p.y >= mid.y ? 2 : 0) + (p.z >= mid.z ? 4 : 0);
        hist[static_cast<std::size_t>(b)] += 1.0;
    }
    m.entropy = 0.0;
    for (double c : hist)
        if (c > 0.0) m.entropy -= (c / n) * std::log(c / n);

    // Eq. 3
    if (!normals.empty()) {
        Vec3 mean;
        for (const Vec3& nv : normals) mean += nv;
        mean = mean / n;
        if (mean.norm() < 1e-12) {
            m.normal_variation = 1.0;
        } else {
            const Vec3 avg = mean.normalized();
            double cos_theta = 0.0;
            for (const Vec3& nv : normals) cos_theta += nv.dot(avg);
            m.normal_variation = 1.0 - cos_theta / n;
        }
    }

    if (pts.size() < 3) {
        m.degenerate = true;
        return m;
    }
    const Jacobi3 eig = jacobi_covariance(pts);
    const double l1 = std::max(eig.values[0], 0.0);
    const double l2 = std::max(eig.values[1], 0.0);
    const double l3 = std::max(eig.values[2], 0.0);
    if (l1 <= 0.0) {
        m.degenerate = true;
        return m;
    }
    m.linearity = (l1 - l2) / l1;
    m.planarity = (l2 - l3) / l1;
    m.curvature = l3 / (l1 + l2 + l3);

    Vec3 centroid;
    for (const Vec3& p : pts) centroid += p;
    centroid = centroid / n;
    double ss = 0.0;
    for (const Vec3& p : pts) {
        const double d = (p - centroid).dot(eig.vectors[2]);
        ss += d * d;
    }
    m.roughness = std::sqrt(ss / n);
    return m;
}

/// RMS point-to-plane distance minimized by exhaustive direction search
/// (Fibonacci sphere plus local refinement); plane through the centroid.
inline double roughness_plane_search(const std::vector<Vec3>& pts) {
    Vec3 centroid;
    for (const Vec3& p : pts) centroid += p;
    centroid = centroid / static_cast<double>(pts.size());

    auto rms = [&](const Vec3& normal) {
        double ss = 0.0;
        for (const Vec3& p : pts) {
            const double d = (p - centroid).dot(normal);
            ss += d * d;
        }
        return std::sqrt(ss / static_cast<double>(pts.size()));
    };

    Vec3 best_dir{0, 0, 1};
    double best = rms(best_dir);
    const int samples = 20000;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < samples; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / samples;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * i;
        const Vec3 dir{r * std::cos(phi), y, r * std::sin(phi)};
        const double v = rms(dir);
        if (v < best) {
            best = v;
            best_dir = dir;
        }
    }
    // local refinement around the best direction
    double step = 2.0 * M_PI / std::sqrt(static_cast<double>(samples));
    for (int round = 0; round < 8; ++round) {
        bool improved = true;
        while (improved) {
            improved = false;
            Vec3 u = std::abs(best_dir.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
            const Vec3 t1 = best_dir.cross(u).normalized();
            const Vec3 t2 = best_dir.cross(t1).normalized();
            for (const Vec3& d : {t1, t1 * -1.0, t2, t2 * -1.0}) {
                const Vec3 cand = (best_dir + d * step).normalized();
                const double v = rms(cand);
                if (v < best) {
                    best = v;
                    best_dir = cand;
                    improved = true;
                }
            }
        }
        step *= 0.25;
    }
    return best;
}

// --- nearest neighbors --------------------------------------------------

inline double nn_distance(const Vec3& q, const std::vector<Vec3>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : pts) best = std::min(best, (p - q).norm());
    return best;
}

inline std::vector<int> knn(const Vec3& q, const std::vector<Vec3>& pts, int k) {
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const double da = (pts[static_cast<std::size_t>(a)] - q).squared_norm();
        const double db = (pts[static_cast<std::size_t>(b)] - q).squared_norm();
        return da != db ? da < db : a < b;
    });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

inline double chamfer(const voxpyr::PointCloud& a, const voxpyr::PointCloud& b) {
    double sum_a = 0.0, sum_b = 0.0;
    for (const Vec3& p : a.points) sum_a += nn_distance(p, b.points);
    for (const Vec3& q : b.points) sum_b += nn_distance(q, a.points);
    return sum_a / static_cast<double>(a.size()) + sum_b / static_cast<double>(b.size());
}

inline double f1_point_cloud(const voxpyr::PointCloud& pred, const voxpyr::PointCloud& gt,
                             double radius) {
    std::size_t pred_hit = 0, gt_hit = 0;
    for (const Vec3& p : pred.points)
        if (nn_distance(p, gt.points) <= radius) ++pred_hit;
    for (const Vec3& q : gt.points)
        if (nn_distance(q, pred.points) <= radius) ++gt_hit;
    const double precision = static_cast<double>(pred_hit) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(gt_hit) / static_cast<double>(gt.size());
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// --- grids ----------------------------------------------------------------

/// Dense-array binning; counts distinct occupied cells.
inline std::size_t occupied_cell_count(const voxpyr::PointCloud& cloud, int r) {
    std::vector<char> hit(static_cast<std::size_t>(r) * r * r, 0);
    for (const Vec3& p : cloud.points) {
        const int i = std::min(static_cast<int>(p.x * r), r - 1);
        const int j = std::min(static_cast<int>(p.y * r), r - 1);
        const int k = std::min(static_cast<int>(p.z * r), r - 1);
        hit[(static_cast<std::size_t>(i) * r + j) * r + k] = 1;
    }
    return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
}

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Confusion confusion(const voxpyr::OccupancyGrid& pred, const voxpyr::OccupancyGrid& gt) {
    Confusion c;
    for (std::size_t i = 0; i < pred.cell_count(); ++i) {
        const bool p = pred.at(i), g = gt.at(i);
        if (p && g) ++c.tp;
        else if (p) ++c.fp;
        else if (g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// --- pyramid ----------------------------------------------------------------

/// Exhaustive scan for a remaining mergeable block: any 2x2x2-aligned group
/// of eight same-level sibling leaves, all non-complex or empty. Returns the
/// number of such blocks (0 at a fixpoint).
inline std::size_t mergeable_block_count(const voxpyr::VoxelPyramid& pyr) {
    std::map<std::pair<int, voxpyr::CellIndex>, const voxpyr::PyramidNode*> by_level_anchor;
    for (const voxpyr::PyramidNode& n : pyr.leaves)
        by_level_anchor[{n.level, n.anchor}] = &n;

    std::size_t blocks = 0;
    for (const voxpyr::PyramidNode& n : pyr.leaves) {
        const int size = n.size();
        const int parent = size * 2;
        if (parent > pyr.base_resolution) continue;
        const voxpyr::CellIndex base{n.anchor.i / parent * parent, n.anchor.j / parent * parent,
                                     n.anchor.k / parent * parent};
        if (!(n.anchor == base)) continue;  // count each block once, at its corner child
        bool all = true;
        for (int di = 0; di < 2 && all; ++di)
            for (int dj = 0; dj < 2 && all; ++dj)
                for (int dk = 0; dk < 2 && all; ++dk) {
                    auto it = by_level_anchor.find(
                        {n.level, {base.i + di * size, base.j + dj * size, base.k + dk * size}});
                    if (it == by_level_anchor.end() || !it->second->mergeable()) all = false;
                }
        if (all) ++blocks;
    }
    return blocks;
}

/// Sum of leaf volumes in level-0 cells; must equal R^3 for a tiling.
inline long long tiled_cell_count(const voxpyr::VoxelPyramid& pyr) {
    long long total = 0;
    for (const voxpyr::PyramidNode& n : pyr.leaves) {
        const long long s = n.size();
        total += s * s * s;
    }
    return total;
}

/// Checks leaves are pairwise disjoint by marking covered level-0 cells.
inline bool leaves_disjoint_and_cover(const voxpyr::VoxelPyramid& pyr) {
    const int r = pyr.base_resolution;
    std::vector<char> covered(static_cast<std::size_t>(r) * r * r, 0);
    for (const voxpyr::PyramidNode& n : pyr.leaves) {
        const int s = n.size();
        for (int di = 0; di < s; ++di)
            for (int dj = 0; dj < s; ++dj)
                for (int dk = 0; dk < s; ++dk) {
                    const std::size_t lin =
                        (static_cast<std::size_t>(n.anchor.i + di) * r + (n.anchor.j + dj)) * r +
                        (n.anchor.k + dk);
                    if (covered[lin]) return false;
                    covered[lin] = 1;
                }
    }
    return std::count(covered.begin(), covered.end(), 1) ==
           static_cast<long long>(covered.size());
}

// --- misc -------------------------------------------------------------------

/// Order-statistic percentile via nth_element, written independently of the
/// library's sort-then-interpolate version.
inline double percentile(std::vector<double> values, double pct) {
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo),
                     values.end());
    const double v_lo = values[lo];
    if (lo + 1 >= values.size()) return v_lo;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo + 1),
                     values.end());
    return v_lo + (rank - static_cast<double>(lo)) * (values[lo + 1] - v_lo);
}

}  // namespace oracle
