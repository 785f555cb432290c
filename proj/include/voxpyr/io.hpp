#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "voxpyr/error.hpp"
#include "voxpyr/point_cloud.hpp"

namespace voxpyr {

enum class CloudFormat { ply_ascii, xyz };

inline CloudFormat format_from_extension(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".ply") return CloudFormat::ply_ascii;
    if (ext == ".xyz" || ext == ".txt") return CloudFormat::xyz;
    throw usage_error("cannot infer point-cloud format from extension '" + ext + "' (" + path +
                      "); expected .ply or .xyz");
}

namespace detail {

// Decimal text with 9 significant digits; values that came from such text
// round-trip bit-exactly.
inline std::string format_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline bool parse_fields(const std::string& line, std::vector<double>& out) {
    out.clear();
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        if (p >= end) break;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc()) return false;
        out.push_back(v);
        p = next;
    }
    return true;
}

inline void finalize(PointCloud& cloud) {
    cloud.source_bounds = cloud.bounds();
}

}  // namespace detail

/// Whitespace-separated rows of 3 (x y z) or 6 (x y z nx ny nz) values.
inline PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open '" + path + "'");

    PointCloud cloud;
    std::string line;
    std::vector<double> fields;
    long line_no = 0;
    int columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!detail::parse_fields(line, fields))
            throw parse_error("xyz: non-numeric value in '" + path + "'", line_no);
        if (fields.empty()) continue;
        if (columns == 0) {
            if (fields.size() != 3 && fields.size() != 6)
                throw parse_error("xyz: expected 3 or 6 columns, got " +
                                      std::to_string(fields.size()) + " in '" + path + "'",
                                  line_no);
            columns = static_cast<int>(fields.size());
        } else if (static_cast<int>(fields.size()) != columns) {
            throw parse_error("xyz: inconsistent column count in '" + path + "'", line_no);
        }
        cloud.points.push_back({fields[0], fields[1], fields[2]});
        if (columns == 6) cloud.normals.push_back({fields[3], fields[4], fields[5]});
    }
    if (cloud.empty()) throw error("xyz: no points in '" + path + "'");
    detail::finalize(cloud);
    return cloud;
}

inline void save_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot write '" + path + "'");
    const bool with_normals = cloud.has_normals();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out << detail::format_coord(p.x) << ' ' << detail::format_coord(p.y) << ' '
            << detail::format_coord(p.z);
        if (with_normals) {
            const Vec3& n = cloud.normals[i];
            out << ' ' << detail::format_coord(n.x) << ' ' << detail::format_coord(n.y) << ' '
                << detail::format_coord(n.z);
        }
        out << '\n';
    }
}

/// ASCII PLY with an `element vertex` carrying x y z and optionally nx ny nz.
/// Other properties are read and ignored; other elements are skipped.
inline PointCloud load_ply_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open '" + path + "'");

    std::string line;
    long line_no = 0;

    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw parse_error(std::string("ply: unexpected end of file, expected ") + what, line_no);
        ++line_no;
    };

    next_line("magic 'ply'");
    if (line != "ply" && line != "ply\r") throw parse_error("ply: missing 'ply' magic", line_no);

    long vertex_count = -1;
    bool in_vertex_element = false;
    bool saw_format = false;
    std::vector<std::string> vertex_props;
    // header
    for (;;) {
        next_line("header line");
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "comment" || tag == "obj_info" || tag.empty()) continue;
        if (tag == "format") {
            std::string kind;
            ss >> kind;
            if (kind != "ascii")
                throw parse_error("ply: only ascii format is supported, got '" + kind + "'",
                                  line_no);
            saw_format = true;
        } else if (tag == "element") {
            std::string name;
            long count = -1;
            ss >> name >> count;
            if (count < 0) throw parse_error("ply: malformed element line", line_no);
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) vertex_count = count;
        } else if (tag == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ss >> type >> name;
            if (type == "list") throw parse_error("ply: list properties are not supported on vertices", line_no);
            if (name.empty()) throw parse_error("ply: malformed property line", line_no);
            vertex_props.push_back(name);
        } else if (tag == "end_header") {
            break;
        } else {
            throw parse_error("ply: unknown header keyword '" + tag + "'", line_no);
        }
    }
    if (!saw_format) throw parse_error("ply: missing format line", line_no);
    if (vertex_count < 0) throw parse_error("ply: no vertex element declared", line_no);

    auto prop_index = [&](const char* name) {
        for (std::size_t i = 0; i < vertex_props.size(); ++i)
            if (vertex_props[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int ix = prop_index("x"), iy = prop_index("y"), iz = prop_index("z");
    if (ix < 0 || iy < 0 || iz < 0)
        throw parse_error("ply: vertex element must declare x, y, z properties", line_no);
    const int inx = prop_index("nx"), iny = prop_index("ny"), inz = prop_index("nz");
    const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(vertex_count));
    std::vector<double> fields;
    for (long v = 0; v < vertex_count; ++v) {
        if (!std::getline(in, line))
            throw parse_error("ply: header declares " + std::to_string(vertex_count) +
                                  " vertices but file ends after " + std::to_string(v),
                              line_no);
        ++line_no;
        if (!detail::parse_fields(line, fields) ||
            fields.size() != vertex_props.size())
            throw parse_error("ply: malformed vertex row", line_no);
        cloud.points.push_back({fields[ix], fields[iy], fields[iz]});
        if (with_normals) cloud.normals.push_back({fields[inx], fields[iny], fields[inz]});
    }
    if (cloud.empty()) throw error("ply: no points in '" + path + "'");
    detail::finalize(cloud);
    return cloud;
}

inline void save_ply_ascii(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot write '" + path + "'");
    const bool with_normals = cloud.has_normals();
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n';
    out << "property float x\nproperty float y\nproperty float z\n";
    if (with_normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out << detail::format_coord(p.x) << ' ' << detail::format_coord(p.y) << ' '
            << detail::format_coord(p.z);
        if (with_normals) {
            const Vec3& n = cloud.normals[i];
            out << ' ' << detail::format_coord(n.x) << ' ' << detail::format_coord(n.y) << ' '
                << detail::format_coord(n.z);
        }
        out << '\n';
    }
}

inline PointCloud load_point_cloud(const std::string& path, CloudFormat format) {
    return format == CloudFormat::ply_ascii ? load_ply_ascii(path) : load_xyz(path);
}

inline PointCloud load_point_cloud(const std::string& path) {
    return load_point_cloud(path, format_from_extension(path));
}

inline void save_point_cloud(const PointCloud& cloud, const std::string& path,
                             CloudFormat format) {
    if (format == CloudFormat::ply_ascii)
        save_ply_ascii(cloud, path);
    else
        save_xyz(cloud, path);
}

inline void save_point_cloud(const PointCloud& cloud, const std::string& path) {
    save_point_cloud(cloud, path, format_from_extension(path));
}

}  // namespace voxpyr
