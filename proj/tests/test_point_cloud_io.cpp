#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "support/tmpdir.hpp"
#include "voxpyr/fixtures.hpp"
#include "voxpyr/io.hpp"
#include "voxpyr/normals.hpp"
#include "voxpyr/point_cloud.hpp"
#include "voxpyr/spatial_hash.hpp"

using namespace voxpyr;
using testing_support::TmpDir;
using testing_support::write_file;

TEST_CASE("ply: vertices with normals are copied through") {
    TmpDir dir;
    const std::string path = dir.file("tri.ply");
    write_file(path,
               "ply\n"
               "format ascii 1.0\n"
               "comment three vertices\n"
               "element vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property float nx\nproperty float ny\nproperty float nz\n"
               "end_header\n"
               "0 0 0 0 0 1\n"
               "1 0 0 0 0 1\n"
               "0 1 0 0 0 1\n");
    const PointCloud cloud = load_point_cloud(path, CloudFormat::ply_ascii);
    REQUIRE(cloud.size() == 3);
    REQUIRE(cloud.has_normals());
    CHECK(cloud.points[1] == Vec3{1, 0, 0});
    CHECK(cloud.normals[2] == Vec3{0, 0, 1});
}

TEST_CASE("xyz: two plain rows give points without normals") {
    TmpDir dir;
    const std::string path = dir.file("two.xyz");
    write_file(path, "0 0 0\n1 1 1\n");
    const PointCloud cloud = load_xyz(path);
    REQUIRE(cloud.size() == 2);
    CHECK_FALSE(cloud.has_normals());
    CHECK(cloud.source_bounds.lo == Vec3{0, 0, 0});
    CHECK(cloud.source_bounds.hi == Vec3{1, 1, 1});
}

TEST_CASE("xyz: six columns carry normals, mixed widths are rejected") {
    TmpDir dir;
    write_file(dir.file("n.xyz"), "0 0 0 0 0 1\n1 1 1 0 1 0\n");
    const PointCloud with_normals = load_xyz(dir.file("n.xyz"));
    REQUIRE(with_normals.has_normals());
    CHECK(with_normals.normals[1] == Vec3{0, 1, 0});

    TmpDir dir2;
    const std::string out = dir2.file("saved.xyz");
    save_xyz(with_normals, out);
    const PointCloud reloaded = load_xyz(out);
    CHECK(reloaded.normals == with_normals.normals);

    write_file(dir.file("ragged.xyz"), "0 0 0\n1 1 1 0 0 1\n");
    try {
        load_xyz(dir.file("ragged.xyz"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("ply: vertex count mismatch is a parse error") {
    TmpDir dir;
    const std::string path = dir.file("short.ply");
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 5\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n"
               "0 0 0\n1 0 0\n0 1 0\n0 0 1\n");
    CHECK_THROWS_AS(load_ply_ascii(path), parse_error);
}

TEST_CASE("ply: malformed header reports the offending line") {
    TmpDir dir;
    const std::string path = dir.file("bad.ply");
    write_file(path, "ply\nformat ascii 1.0\nelephant vertex 1\nend_header\n0 0 0\n");
    try {
        load_ply_ascii(path);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("ply: binary format and missing coordinates are rejected") {
    TmpDir dir;
    write_file(dir.file("bin.ply"),
               "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n");
    CHECK_THROWS_AS(load_ply_ascii(dir.file("bin.ply")), parse_error);

    write_file(dir.file("noz.ply"),
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nend_header\n0 0\n");
    CHECK_THROWS_AS(load_ply_ascii(dir.file("noz.ply")), parse_error);
}

TEST_CASE("load: zero points is an error") {
    TmpDir dir;
    write_file(dir.file("empty.xyz"), "");
    CHECK_THROWS_AS(load_xyz(dir.file("empty.xyz")), error);
    write_file(dir.file("empty.ply"),
               "ply\nformat ascii 1.0\nelement vertex 0\n"
               "property float x\nproperty float y\nproperty float z\nend_header\n");
    CHECK_THROWS_AS(load_ply_ascii(dir.file("empty.ply")), error);
}

TEST_CASE("ply: extra vertex properties are skipped") {
    TmpDir dir;
    const std::string path = dir.file("extra.ply");
    write_file(path,
               "ply\nformat ascii 1.0\nelement vertex 2\n"
               "property float intensity\nproperty float x\nproperty float y\n"
               "property float z\nend_header\n"
               "9 0.5 0.25 0.125\n"
               "9 1 2 3\n");
    const PointCloud cloud = load_ply_ascii(path);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0] == Vec3{0.5, 0.25, 0.125});
}

TEST_CASE("normalize: symmetric box maps to the unit cube corners") {
    PointCloud cloud;
    cloud.points = {{-1, -1, -1}, {1, 1, 1}};
    const auto r = normalize_to_unit_cube(cloud);
    CHECK_FALSE(r.degenerate);
    CHECK(r.cloud.points[0] == Vec3{0, 0, 0});
    CHECK(r.cloud.points[1] == Vec3{1, 1, 1});
}

TEST_CASE("normalize: single-axis span scales uniformly") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {2, 0, 0}};
    const auto r = normalize_to_unit_cube(cloud);
    CHECK(r.cloud.points[1] == Vec3{1, 0, 0});
    CHECK(r.scale == 0.5);
}

TEST_CASE("normalize: degenerate cloud centers and flags") {
    PointCloud cloud;
    cloud.points = {{5, 5, 5}};
    const auto r = normalize_to_unit_cube(cloud);
    CHECK(r.degenerate);
    CHECK(r.cloud.points[0] == Vec3{0.5, 0.5, 0.5});
    CHECK(r.cloud.source_bounds.lo == Vec3{5, 5, 5});
}

TEST_CASE("normalize: empty cloud is an error") {
    CHECK_THROWS_AS(normalize_to_unit_cube(PointCloud{}), error);
}

TEST_CASE("normalize: idempotent and keeps coordinates in [0,1]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-50.0, 80.0);
    PointCloud cloud;
    for (int i = 0; i < 500; ++i) cloud.points.push_back({coord(rng), coord(rng), coord(rng)});

    const PointCloud once = normalize_to_unit_cube(cloud).cloud;
    for (const Vec3& p : once.points) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 1.0);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= 1.0);
        CHECK(p.z >= 0.0);
        CHECK(p.z <= 1.0);
    }
    const PointCloud twice = normalize_to_unit_cube(once).cloud;
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(std::abs(once.points[i].x - twice.points[i].x) <= 1e-12);
        CHECK(std::abs(once.points[i].y - twice.points[i].y) <= 1e-12);
        CHECK(std::abs(once.points[i].z - twice.points[i].z) <= 1e-12);
    }
}

TEST_CASE("xyz round trip is bit-exact for 9-significant-digit data") {
    // quantize to the serialized precision first; files are the fixpoint
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    PointCloud cloud;
    for (int i = 0; i < 200; ++i) {
        char buf[40];
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
            std::snprintf(buf, sizeof(buf), "%.9g", coord(rng));
            p[a] = std::strtod(buf, nullptr);
        }
        cloud.points.push_back(p);
    }

    TmpDir dir;
    const std::string path = dir.file("round.xyz");
    save_xyz(cloud, path);
    const PointCloud loaded = load_xyz(path);
    REQUIRE(loaded.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(loaded.points[i] == cloud.points[i]);

    // and a second cycle reproduces the file byte for byte
    const std::string again = dir.file("round2.xyz");
    save_xyz(loaded, again);
    CHECK(testing_support::read_file(path) == testing_support::read_file(again));
}

TEST_CASE("ply round trip preserves points and normals") {
    const PointCloud original = estimate_normals(
        normalize_to_unit_cube(fixtures::make_sphere(300, 5)).cloud, 10);
    TmpDir dir;
    save_ply_ascii(original, dir.file("s.ply"));
    const PointCloud loaded = load_ply_ascii(dir.file("s.ply"));
    REQUIRE(loaded.size() == original.size());
    REQUIRE(loaded.has_normals());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK((loaded.points[i] - original.points[i]).norm() < 1e-8);
        CHECK((loaded.normals[i] - original.normals[i]).norm() < 1e-8);
    }
}

TEST_CASE("estimate_normals: planar cloud gives +-z normals") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    PointCloud cloud;
    for (int i = 0; i < 100; ++i) cloud.points.push_back({unit(rng), unit(rng), 0.0});

    const PointCloud with_normals = estimate_normals(cloud, 10);
    for (const Vec3& n : with_normals.normals) {
        CHECK(std::abs(std::abs(n.z) - 1.0) < 1e-3);
        CHECK(std::abs(n.x) < 1e-3);
        CHECK(std::abs(n.y) < 1e-3);
    }
}

TEST_CASE("estimate_normals: sphere normals match the analytic radial field") {
    // Fibonacci sampling keeps the k-neighborhoods compact and symmetric
    PointCloud cloud;
    const int n = 500;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        cloud.points.push_back({r * std::cos(golden * i), y, r * std::sin(golden * i)});
    }
    const PointCloud with_normals = estimate_normals(cloud, 10);
    const double max_angle_deg = 5.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 analytic = cloud.points[i].normalized();  // oracle: p / |p|
        const double cosine = std::abs(with_normals.normals[i].dot(analytic));
        CHECK(std::acos(std::min(1.0, cosine)) * 180.0 / M_PI < max_angle_deg);
    }
}

TEST_CASE("estimate_normals: unit length for every point") {
    const PointCloud cloud = normalize_to_unit_cube(fixtures::make_mixed(2000, 9)).cloud;
    const PointCloud with_normals = estimate_normals(cloud, 16);
    REQUIRE(with_normals.normals.size() == cloud.size());
    for (const Vec3& n : with_normals.normals) CHECK(std::abs(n.norm() - 1.0) < 1e-6);
}

TEST_CASE("estimate_normals: too few points is an error") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(estimate_normals(cloud, 3), usage_error);
    CHECK_THROWS_AS(estimate_normals(cloud, 2), usage_error);  // k below minimum
}

TEST_CASE("estimate_normals: identical under different thread counts") {
    const PointCloud cloud = normalize_to_unit_cube(fixtures::make_cube_edges(1500, 31)).cloud;
    const PointCloud serial = estimate_normals(cloud, 12, 1);
    const PointCloud parallel = estimate_normals(cloud, 12, 4);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(serial.normals[i] == parallel.normals[i]);
}

TEST_CASE("grid index: knn matches the brute-force oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 400; ++i) pts.push_back({unit(rng), unit(rng), unit(rng)});
    const UniformGridIndex index(pts);

    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 q{unit(rng) * 1.4 - 0.2, unit(rng) * 1.4 - 0.2, unit(rng) * 1.4 - 0.2};
        const int k = 1 + static_cast<int>(unit(rng) * 12);
        const std::vector<int> got = index.knn(q, k);
        const std::vector<int> expected = oracle::knn(q, pts, k);
        CHECK(got == expected);
    }
}
