#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "voxpyr/error.hpp"
#include "voxpyr/geometry.hpp"

namespace voxpyr {

/// Uniform-grid index over a point set with exact nearest-neighbor semantics.
/// The longest bounding-box axis is split into `cells_per_axis` cubic cells
/// (1/32 of the unit cube by default). Queries expand Chebyshev rings of
/// cells until the candidate bound exceeds the best distance found, so
/// results equal a brute-force scan. Ties are broken by point index.
class UniformGridIndex {
public:
    explicit UniformGridIndex(const std::vector<Vec3>& points, int cells_per_axis = 32)
        : points_(points) {
        if (points.empty()) throw error("UniformGridIndex: empty point set");
        for (const Vec3& p : points) box_.expand(p);

        const double span = box_.longest_extent();
        cell_ = span > 0.0 ? span / cells_per_axis : 1.0;
        for (int a = 0; a < 3; ++a) {
            dims_[a] = std::max(1, static_cast<int>(std::floor(box_.extent()[a] / cell_)) + 1);
        }

        // counting-sort buckets: offsets_[b]..offsets_[b+1] indexes into order_
        const std::size_t buckets = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
        offsets_.assign(buckets + 1, 0);
        std::vector<int> cell_of(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            cell_of[i] = bucket_of(cell_index(points[i]));
            ++offsets_[static_cast<std::size_t>(cell_of[i]) + 1];
        }
        for (std::size_t b = 1; b <= buckets; ++b) offsets_[b] += offsets_[b - 1];
        order_.resize(points.size());
        std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i)
            order_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(cell_of[i])]++)] =
                static_cast<int>(i);
    }

    /// Indices of the k nearest points to q (k <= size), ordered by
    /// (distance, index). q need not be a member of the set.
    std::vector<int> knn(const Vec3& q, int k) const {
        if (k < 1 || static_cast<std::size_t>(k) > points_.size())
            throw error("knn: k out of range");

        using Cand = std::pair<double, int>;  // (squared distance, index)
        std::priority_queue<Cand> heap;       // max-heap, worst candidate on top

        const std::array<int, 3> home = clamped_cell(q);
        const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (static_cast<int>(heap.size()) == k) {
                // points in ring r are at least (r-1) cell edges away
                const double lb = (ring - 1) * cell_;
                if (lb > 0.0 && lb * lb > heap.top().first) break;
            }
            bool any_cell = false;
            visit_ring(home, ring, [&](int ci, int cj, int ck) {
                any_cell = true;
                scan_cell(ci, cj, ck, q, k, heap);
            });
            // an empty ring means the window already covers the whole grid
            if (!any_cell && ring > 0) break;
        }

        std::vector<int> out(heap.size());
        std::vector<Cand> tmp;
        tmp.reserve(heap.size());
        while (!heap.empty()) {
            tmp.push_back(heap.top());
            heap.pop();
        }
        std::sort(tmp.begin(), tmp.end());
        for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].second;
        return out;
    }

    /// Index of the nearest point to q.
    int nearest(const Vec3& q) const { return knn(q, 1)[0]; }

    /// Euclidean distance from q to the nearest indexed point.
    double nearest_distance(const Vec3& q) const {
        return (points_[static_cast<std::size_t>(nearest(q))] - q).norm();
    }

    std::size_t size() const { return points_.size(); }

private:
    std::array<int, 3> cell_index(const Vec3& p) const {
        std::array<int, 3> c;
        for (int a = 0; a < 3; ++a) {
            int v = static_cast<int>(std::floor((p[a] - box_.lo[a]) / cell_));
            c[a] = std::clamp(v, 0, dims_[a] - 1);
        }
        return c;
    }

    std::array<int, 3> clamped_cell(const Vec3& p) const { return cell_index(p); }

    int bucket_of(const std::array<int, 3>& c) const {
        return (c[0] * dims_[1] + c[1]) * dims_[2] + c[2];
    }

    Box3 cell_box(int ci, int cj, int ck) const {
        Box3 b;
        b.lo = {box_.lo.x + ci * cell_, box_.lo.y + cj * cell_, box_.lo.z + ck * cell_};
        b.hi = {b.lo.x + cell_, b.lo.y + cell_, b.lo.z + cell_};
        return b;
    }

    template <class Fn>
    void visit_ring(const std::array<int, 3>& home, int ring, Fn&& fn) const {
        const int i0 = std::max(0, home[0] - ring), i1 = std::min(dims_[0] - 1, home[0] + ring);
        const int j0 = std::max(0, home[1] - ring), j1 = std::min(dims_[1] - 1, home[1] + ring);
        const int k0 = std::max(0, home[2] - ring), k1 = std::min(dims_[2] - 1, home[2] + ring);
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                for (int k = k0; k <= k1; ++k) {
                    const int cheb = std::max(
                        {std::abs(i - home[0]), std::abs(j - home[1]), std::abs(k - home[2])});
                    if (cheb != ring) continue;
                    fn(i, j, k);
                }
    }

    void scan_cell(int ci, int cj, int ck, const Vec3& q, int k,
                   std::priority_queue<std::pair<double, int>>& heap) const {
        if (static_cast<int>(heap.size()) == k &&
            cell_box(ci, cj, ck).squared_distance(q) > heap.top().first)
            return;
        const int b = bucket_of({ci, cj, ck});
        for (int s = offsets_[static_cast<std::size_t>(b)];
             s < offsets_[static_cast<std::size_t>(b) + 1]; ++s) {
            const int idx = order_[static_cast<std::size_t>(s)];
            const double d2 = (points_[static_cast<std::size_t>(idx)] - q).squared_norm();
            const std::pair<double, int> cand{d2, idx};
            if (static_cast<int>(heap.size()) < k) {
                heap.push(cand);
            } else if (cand < heap.top()) {
                heap.pop();
                heap.push(cand);
            }
        }
    }

    const std::vector<Vec3>& points_;
    Box3 box_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<int> offsets_;
    std::vector<int> order_;
};

}  // namespace voxpyr
