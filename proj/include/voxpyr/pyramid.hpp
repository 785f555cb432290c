#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "voxpyr/point_cloud.hpp"
#include "voxpyr/voxel_grid.hpp"

namespace voxpyr {

/// Cube-shaped leaf covering 2^level cells per axis, anchored at a level-0
/// index whose components are multiples of 2^level.
struct PyramidNode {
    int level = 0;
    CellIndex anchor;
    CellLabel label = CellLabel::empty;
    long point_count = 0;

    int size() const { return 1 << level; }
    bool mergeable() const {
        return label == CellLabel::non_complex || label == CellLabel::empty;
    }
};

/// Mixed-size tiling of the grid produced by iterative 2x2x2 merging of
/// non-complex regions. Leaves are kept sorted lexicographically by anchor.
struct VoxelPyramid {
    std::vector<PyramidNode> leaves;
    int base_resolution = 0;
    int rounds_executed = 0;
};

namespace detail {

inline void check_alignment(const PyramidNode& n) {
    const int s = n.size();
    if (n.anchor.i % s || n.anchor.j % s || n.anchor.k % s)
        throw error("pyramid: node anchor not aligned to its level");
}

inline void sort_leaves(std::vector<PyramidNode>& leaves) {
    std::sort(leaves.begin(), leaves.end(), [](const PyramidNode& a, const PyramidNode& b) {
        return a.anchor < b.anchor;
    });
}

}  // namespace detail

/// One merge pass over same-level siblings: every 2x2x2-aligned block whose
/// eight level-`level` children are all non-complex or empty collapses into
/// one level+1 parent (empty only if all eight children are empty). Leaves
/// of other levels pass through untouched.
inline std::pair<std::vector<PyramidNode>, int> merge_round(
    const std::vector<PyramidNode>& leaves, int level) {
    const int child_size = 1 << level;
    const int parent_size = child_size * 2;

    struct Block {
        int present = 0;
        int empty = 0;
        bool all_mergeable = true;
        long points = 0;
    };
    std::map<CellIndex, Block> blocks;
    for (const PyramidNode& n : leaves) {
        if (n.level != level) continue;
        detail::check_alignment(n);
        const CellIndex base{n.anchor.i / parent_size * parent_size,
                             n.anchor.j / parent_size * parent_size,
                             n.anchor.k / parent_size * parent_size};
        Block& b = blocks[base];
        ++b.present;
        if (n.label == CellLabel::empty) ++b.empty;
        if (!n.mergeable()) b.all_mergeable = false;
        b.points += n.point_count;
    }

    std::vector<PyramidNode> out;
    out.reserve(leaves.size());
    int merges = 0;
    for (const PyramidNode& n : leaves) {
        if (n.level != level) {
            out.push_back(n);
            continue;
        }
        const CellIndex base{n.anchor.i / parent_size * parent_size,
                             n.anchor.j / parent_size * parent_size,
                             n.anchor.k / parent_size * parent_size};
        const Block& b = blocks.at(base);
        if (b.present == 8 && b.all_mergeable) {
            if (n.anchor == base) {  // emit the parent once, at the block base
                PyramidNode parent;
                parent.level = level + 1;
                parent.anchor = base;
                parent.label = (b.empty == 8) ? CellLabel::empty : CellLabel::non_complex;
                parent.point_count = b.points;
                out.push_back(parent);
                ++merges;
            }
        } else {
            out.push_back(n);
        }
    }
    detail::sort_leaves(out);
    return {std::move(out), merges};
}

/// Builds the pyramid from a fully labeled grid: materializes all R^3
/// level-0 leaves (absent cells as empty) and applies merge_round at levels
/// 0,1,... until a round performs no merges or the level reaches log2(R).
inline VoxelPyramid build_pyramid(const VoxelGrid& grid) {
    const int r = grid.resolution();
    VoxelPyramid pyr;
    pyr.base_resolution = r;
    pyr.leaves.reserve(static_cast<std::size_t>(r) * r * r);

    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k) {
                PyramidNode n;
                n.anchor = {i, j, k};
                if (const VoxelCell* cell = grid.find({i, j, k}); cell && !cell->empty()) {
                    if (cell->label == CellLabel::unlabeled)
                        throw error("build_pyramid: grid has unlabeled cells; classify first");
                    n.label = cell->label;
                    n.point_count = cell->point_count();
                } else {
                    n.label = CellLabel::empty;
                }
                pyr.leaves.push_back(n);
            }

    int max_level = 0;
    while ((1 << max_level) < r) ++max_level;
    for (int level = 0; level < max_level; ++level) {
        auto [merged, count] = merge_round(pyr.leaves, level);
        if (count == 0) break;
        pyr.leaves = std::move(merged);
        ++pyr.rounds_executed;
    }
    return pyr;
}

/// Geometric center of a leaf in normalized coordinates.
inline Vec3 leaf_center(const PyramidNode& n, int base_resolution) {
    const double half = n.size() * 0.5;
    return {(n.anchor.i + half) / base_resolution, (n.anchor.j + half) / base_resolution,
            (n.anchor.k + half) / base_resolution};
}

/// Reconstruction proxy: one point at the center of every non-empty leaf.
inline PointCloud pyramid_to_points(const VoxelPyramid& pyr) {
    PointCloud cloud;
    for (const PyramidNode& n : pyr.leaves) {
        if (n.label == CellLabel::empty) continue;
        cloud.points.push_back(leaf_center(n, pyr.base_resolution));
    }
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

/// Text serialization: `base_resolution R`, `rounds N`, then one line per
/// leaf `level ai aj ak label point_count` in anchor order.
inline void save_pyramid(const VoxelPyramid& pyr, std::ostream& os) {
    os << "base_resolution " << pyr.base_resolution << '\n';
    os << "rounds " << pyr.rounds_executed << '\n';
    for (const PyramidNode& n : pyr.leaves)
        os << n.level << ' ' << n.anchor.i << ' ' << n.anchor.j << ' ' << n.anchor.k << ' '
           << label_name(n.label) << ' ' << n.point_count << '\n';
}

inline VoxelPyramid load_pyramid(std::istream& is) {
    std::string tag;
    VoxelPyramid pyr;
    if (!(is >> tag >> pyr.base_resolution) || tag != "base_resolution")
        throw parse_error("pyramid: expected 'base_resolution R' header", 1);
    if (!(is >> tag >> pyr.rounds_executed) || tag != "rounds")
        throw parse_error("pyramid: expected 'rounds N' header", 2);
    PyramidNode n;
    std::string label;
    while (is >> n.level >> n.anchor.i >> n.anchor.j >> n.anchor.k >> label >> n.point_count) {
        n.label = label_from_name(label);
        pyr.leaves.push_back(n);
    }
    return pyr;
}

}  // namespace voxpyr
