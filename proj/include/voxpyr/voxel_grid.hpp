#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "voxpyr/metrics.hpp"
#include "voxpyr/point_cloud.hpp"

namespace voxpyr {

struct CellIndex {
    int i = 0;
    int j = 0;
    int k = 0;
    auto operator<=>(const CellIndex&) const = default;
};

inline bool is_power_of_two(int v) { return v >= 1 && (v & (v - 1)) == 0; }

struct GridConfig {
    int resolution = 16;       // cells per axis, power of two >= 2
    double percentile = 75.0;  // threshold percentile in (0, 100)
    std::array<std::optional<double>, kMetricCount> fixed_thresholds{};
};

inline void validate_grid_config(const GridConfig& cfg) {
    if (cfg.resolution < 2 || !is_power_of_two(cfg.resolution))
        throw usage_error("grid resolution must be a power of two >= 2, got " +
                          std::to_string(cfg.resolution));
    if (!(cfg.percentile > 0.0 && cfg.percentile < 100.0))
        throw usage_error("percentile must lie in (0, 100)");
}

struct VoxelCell {
    CellIndex index;
    std::vector<int> point_indices;
    double volume = 0.0;  // (1/R)^3
    std::optional<ComplexityMetrics> metrics;
    CellLabel label = CellLabel::unlabeled;

    int point_count() const { return static_cast<int>(point_indices.size()); }
    bool empty() const { return point_indices.empty(); }
};

/// Dense boolean occupancy over an R^3 grid; the classification target for
/// the voxel metrics.
class OccupancyGrid {
public:
    explicit OccupancyGrid(int resolution)
        : resolution_(resolution),
          bits_(static_cast<std::size_t>(resolution) * resolution * resolution, 0) {}

    int resolution() const { return resolution_; }
    std::size_t cell_count() const { return bits_.size(); }

    bool at(int i, int j, int k) const { return bits_[linear(i, j, k)] != 0; }
    void set(int i, int j, int k, bool v) { bits_[linear(i, j, k)] = v ? 1 : 0; }
    bool at(std::size_t linear_index) const { return bits_[linear_index] != 0; }

    std::size_t occupied_count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits_) n += b;
        return n;
    }

private:
    std::size_t linear(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * resolution_ + j) * resolution_ + k;
    }

    int resolution_;
    std::vector<std::uint8_t> bits_;
};

/// Sparse fixed-resolution partition of the unit cube. Only occupied cells
/// are stored; an absent index means an empty cell. Immutable once built
/// except for metric/label enrichment, and safe to share across threads
/// afterwards.
class VoxelGrid {
public:
    VoxelGrid(GridConfig config, std::string cloud_ref)
        : config_(config), cloud_ref_(std::move(cloud_ref)) {}

    const GridConfig& config() const { return config_; }
    int resolution() const { return config_.resolution; }
    const std::string& cloud_ref() const { return cloud_ref_; }

    const std::map<CellIndex, VoxelCell>& cells() const { return cells_; }
    std::map<CellIndex, VoxelCell>& cells() { return cells_; }

    const VoxelCell* find(const CellIndex& idx) const {
        auto it = cells_.find(idx);
        return it == cells_.end() ? nullptr : &it->second;
    }

    VoxelCell& cell_at(const CellIndex& idx) {
        auto [it, inserted] = cells_.try_emplace(idx);
        if (inserted) {
            it->second.index = idx;
            const double edge = 1.0 / config_.resolution;
            it->second.volume = edge * edge * edge;
        }
        return it->second;
    }

    std::size_t occupied_cell_count() const { return cells_.size(); }

    std::size_t total_point_count() const {
        std::size_t n = 0;
        for (const auto& [idx, cell] : cells_) n += cell.point_indices.size();
        return n;
    }

private:
    GridConfig config_;
    std::string cloud_ref_;
    std::map<CellIndex, VoxelCell> cells_;
};

/// Cell index of a normalized coordinate: floor(p * R), with 1.0 clamped to
/// R-1 so the grid is closed over [0,1]^3.
inline CellIndex cell_of_point(const Vec3& p, int resolution) {
    CellIndex c;
    c.i = std::min(static_cast<int>(p.x * resolution), resolution - 1);
    c.j = std::min(static_cast<int>(p.y * resolution), resolution - 1);
    c.k = std::min(static_cast<int>(p.z * resolution), resolution - 1);
    return c;
}

/// Partition a normalized cloud into the fixed-resolution grid.
inline VoxelGrid voxelize(const PointCloud& cloud, const GridConfig& config,
                          std::string cloud_ref = "") {
    validate_grid_config(config);
    VoxelGrid grid(config, std::move(cloud_ref));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0 && p.z >= 0.0 && p.z <= 1.0))
            throw error("voxelize: point " + std::to_string(i) +
                        " lies outside [0,1]^3; normalize the cloud first");
        grid.cell_at(cell_of_point(p, config.resolution))
            .point_indices.push_back(static_cast<int>(i));
    }
    return grid;
}

inline OccupancyGrid occupancy_grid(const VoxelGrid& grid) {
    OccupancyGrid occ(grid.resolution());
    for (const auto& [idx, cell] : grid.cells())
        if (!cell.empty()) occ.set(idx.i, idx.j, idx.k, true);
    return occ;
}

/// Text serialization: header `resolution R`, one line per occupied cell
/// `i j k n_points label`.
inline void save_grid(const VoxelGrid& grid, std::ostream& os) {
    os << "resolution " << grid.resolution() << '\n';
    for (const auto& [idx, cell] : grid.cells()) {
        if (cell.empty()) continue;
        os << idx.i << ' ' << idx.j << ' ' << idx.k << ' ' << cell.point_count() << ' '
           << label_name(cell.label) << '\n';
    }
}

/// Loads the text form. Cells carry counts but no point indices, which is
/// enough for occupancy comparisons.
inline VoxelGrid load_grid(std::istream& is) {
    std::string tag;
    int resolution = 0;
    if (!(is >> tag >> resolution) || tag != "resolution")
        throw parse_error("grid: expected 'resolution R' header", 1);
    GridConfig cfg;
    cfg.resolution = resolution;
    validate_grid_config(cfg);
    VoxelGrid grid(cfg, "");
    CellIndex idx;
    int n = 0;
    std::string label;
    long line = 1;
    while (is >> idx.i >> idx.j >> idx.k >> n >> label) {
        ++line;
        if (idx.i < 0 || idx.i >= resolution || idx.j < 0 || idx.j >= resolution || idx.k < 0 ||
            idx.k >= resolution || n <= 0)
            throw parse_error("grid: cell out of range", line);
        VoxelCell& cell = grid.cell_at(idx);
        cell.point_indices.assign(static_cast<std::size_t>(n), -1);
        cell.label = label_from_name(label);
    }
    return grid;
}

}  // namespace voxpyr
