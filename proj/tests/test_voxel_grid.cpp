#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "voxpyr/fixtures.hpp"
#include "voxpyr/voxel_grid.hpp"

using namespace voxpyr;

namespace {

PointCloud random_unit_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) cloud.points.push_back({unit(rng), unit(rng), unit(rng)});
    cloud.source_bounds = cloud.bounds();
    return cloud;
}

}  // namespace

TEST_CASE("voxelize: interior point lands in floor(p*R)") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.1, 0.1}};
    const VoxelGrid grid = voxelize(cloud, GridConfig{});
    REQUIRE(grid.occupied_cell_count() == 1);
    CHECK(grid.find({1, 1, 1}) != nullptr);
}

TEST_CASE("voxelize: coordinate 1.0 clamps to the last cell") {
    PointCloud cloud;
    cloud.points = {{1.0, 1.0, 1.0}};
    const VoxelGrid grid = voxelize(cloud, GridConfig{});
    REQUIRE(grid.occupied_cell_count() == 1);
    CHECK(grid.find({15, 15, 15}) != nullptr);
}

TEST_CASE("voxelize: occupied-cell count matches the histogram oracle") {
    const PointCloud cloud = random_unit_cloud(10000, 99);
    const VoxelGrid grid = voxelize(cloud, GridConfig{});
    CHECK(grid.occupied_cell_count() == oracle::occupied_cell_count(cloud, 16));
}

TEST_CASE("voxelize: out-of-range input names the offending point") {
    PointCloud cloud;
    cloud.points = {{0.5, 0.5, 0.5}, {1.5, 0.0, 0.0}};
    CHECK_THROWS_WITH(voxelize(cloud, GridConfig{}), Catch::Matchers::ContainsSubstring("point 1"));
}

TEST_CASE("voxelize: partition property and determinism") {
    const PointCloud cloud = random_unit_cloud(5000, 7);
    const VoxelGrid grid = voxelize(cloud, GridConfig{});

    std::vector<int> seen(cloud.size(), 0);
    for (const auto& [idx, cell] : grid.cells()) {
        CHECK_FALSE(cell.empty());  // only occupied cells are stored
        for (int pi : cell.point_indices) ++seen[static_cast<std::size_t>(pi)];
    }
    for (int count : seen) CHECK(count == 1);
    CHECK(grid.total_point_count() == cloud.size());

    const VoxelGrid again = voxelize(cloud, GridConfig{});
    REQUIRE(again.occupied_cell_count() == grid.occupied_cell_count());
    for (const auto& [idx, cell] : grid.cells()) {
        const VoxelCell* other = again.find(idx);
        REQUIRE(other != nullptr);
        CHECK(other->point_indices == cell.point_indices);
    }
}

TEST_CASE("voxelize: doubling the resolution only splits cells") {
    const PointCloud cloud = random_unit_cloud(3000, 13);
    // structural form: the R=32 cell of a point halves to its R=16 cell,
    // so two points sharing a cell at 32 must share one at 16
    for (const Vec3& p : cloud.points) {
        const CellIndex fine = cell_of_point(p, 32);
        const CellIndex coarse = cell_of_point(p, 16);
        CHECK(fine.i / 2 == coarse.i);
        CHECK(fine.j / 2 == coarse.j);
        CHECK(fine.k / 2 == coarse.k);
    }
}

TEST_CASE("occupancy_grid: empty, single, and counted") {
    GridConfig cfg;
    const VoxelGrid empty(cfg, "");
    const OccupancyGrid none = occupancy_grid(empty);
    CHECK(none.occupied_count() == 0);

    PointCloud one;
    one.points = {{0.5, 0.5, 0.5}};
    const OccupancyGrid single = occupancy_grid(voxelize(one, cfg));
    CHECK(single.occupied_count() == 1);
    CHECK(single.at(8, 8, 8));

    const PointCloud cloud = random_unit_cloud(10000, 99);
    const VoxelGrid grid = voxelize(cloud, cfg);
    CHECK(occupancy_grid(grid).occupied_count() == grid.occupied_cell_count());
}

TEST_CASE("grid config validation") {
    GridConfig cfg;
    CHECK(cfg.percentile == 75.0);  // default per construction

    cfg.resolution = 12;
    CHECK_THROWS_AS(validate_grid_config(cfg), usage_error);
    cfg.resolution = 1;
    CHECK_THROWS_AS(validate_grid_config(cfg), usage_error);
    cfg.resolution = 16;
    cfg.percentile = 0.0;
    CHECK_THROWS_AS(validate_grid_config(cfg), usage_error);
    cfg.percentile = 100.0;
    CHECK_THROWS_AS(validate_grid_config(cfg), usage_error);
    cfg.percentile = 75.0;
    CHECK_NOTHROW(validate_grid_config(cfg));
}

TEST_CASE("grid serialization round trip") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.2, 0.3}, {0.11, 0.21, 0.31}, {0.9, 0.9, 0.9}};
    VoxelGrid grid = voxelize(cloud, GridConfig{});
    for (auto& [idx, cell] : grid.cells()) cell.label = CellLabel::non_complex;

    std::stringstream ss;
    save_grid(grid, ss);
    const VoxelGrid loaded = load_grid(ss);
    CHECK(loaded.resolution() == 16);
    REQUIRE(loaded.occupied_cell_count() == grid.occupied_cell_count());
    for (const auto& [idx, cell] : grid.cells()) {
        const VoxelCell* other = loaded.find(idx);
        REQUIRE(other != nullptr);
        CHECK(other->point_count() == cell.point_count());
        CHECK(other->label == cell.label);
    }
}

TEST_CASE("grid serialization rejects malformed input") {
    std::stringstream missing("resolutio 16\n");
    CHECK_THROWS_AS(load_grid(missing), parse_error);
    std::stringstream out_of_range("resolution 16\n99 0 0 4 complex\n");
    CHECK_THROWS_AS(load_grid(out_of_range), parse_error);
}
