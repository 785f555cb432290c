#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "voxpyr/geometry.hpp"

namespace voxpyr {

/// Symmetric 3x3 matrix stored as the upper triangle.
struct SymMat3 {
    double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;

    double max_abs() const {
        return std::max({std::abs(a00), std::abs(a01), std::abs(a02), std::abs(a11),
                         std::abs(a12), std::abs(a22)});
    }
};

/// Covariance (1/n scatter) of a point sequence accessed through `get(i)`.
template <class Getter>
SymMat3 covariance3(std::size_t n, Getter&& get) {
    Vec3 mean;
    for (std::size_t i = 0; i < n; ++i) mean += get(i);
    mean = mean / static_cast<double>(n);
    SymMat3 m;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = get(i) - mean;
        m.a00 += d.x * d.x;
        m.a01 += d.x * d.y;
        m.a02 += d.x * d.z;
        m.a11 += d.y * d.y;
        m.a12 += d.y * d.z;
        m.a22 += d.z * d.z;
    }
    const double inv = 1.0 / static_cast<double>(n);
    m.a00 *= inv;
    m.a01 *= inv;
    m.a02 *= inv;
    m.a11 *= inv;
    m.a12 *= inv;
    m.a22 *= inv;
    return m;
}

struct SymEigen3 {
    std::array<double, 3> values{};  // descending: values[0] >= values[1] >= values[2]
    Vec3 smallest;                   // unit eigenvector of values[2]
};

namespace detail {

// characteristic polynomial p(x) = x^3 + c2 x^2 + c1 x + c0
inline std::array<double, 3> char_poly(const SymMat3& m) {
    const double c2 = -(m.a00 + m.a11 + m.a22);
    const double c1 = m.a00 * m.a11 + m.a00 * m.a22 + m.a11 * m.a22 - m.a01 * m.a01 -
                      m.a02 * m.a02 - m.a12 * m.a12;
    const double c0 = -(m.a00 * (m.a11 * m.a22 - m.a12 * m.a12) -
                        m.a01 * (m.a01 * m.a22 - m.a12 * m.a02) +
                        m.a02 * (m.a01 * m.a12 - m.a11 * m.a02));
    return {c2, c1, c0};
}

inline double newton_polish(double x, const std::array<double, 3>& c) {
    for (int it = 0; it < 2; ++it) {
        const double p = ((x + c[0]) * x + c[1]) * x + c[2];
        const double dp = (3.0 * x + 2.0 * c[0]) * x + c[1];
        if (std::abs(dp) < 1e-300) break;
        const double step = p / dp;
        if (!std::isfinite(step)) break;
        x -= step;
    }
    return x;
}

inline Vec3 eigenvector_for(const SymMat3& m, double lambda) {
    const Vec3 r0{m.a00 - lambda, m.a01, m.a02};
    const Vec3 r1{m.a01, m.a11 - lambda, m.a12};
    const Vec3 r2{m.a02, m.a12, m.a22 - lambda};
    const Vec3 c01 = r0.cross(r1);
    const Vec3 c02 = r0.cross(r2);
    const Vec3 c12 = r1.cross(r2);
    Vec3 best = c01;
    if (c02.squared_norm() > best.squared_norm()) best = c02;
    if (c12.squared_norm() > best.squared_norm()) best = c12;
    if (best.squared_norm() > 0.0) return best.normalized();

    // repeated eigenvalue: (A - lambda I) has rank <= 1; any direction
    // orthogonal to its largest row is an eigenvector
    Vec3 row = r0;
    if (r1.squared_norm() > row.squared_norm()) row = r1;
    if (r2.squared_norm() > row.squared_norm()) row = r2;
    if (row.squared_norm() == 0.0) return {0.0, 0.0, 1.0};  // A = lambda I
    Vec3 axis = std::abs(row.x) < std::abs(row.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    return row.cross(axis).normalized();
}

}  // namespace detail

/// Closed-form eigen-decomposition of a symmetric 3x3 matrix: trigonometric
/// root formula followed by two Newton steps on the characteristic
/// polynomial. Eigenvalues come back sorted descending; only the smallest
/// eigenvector is exposed (the plane-fit normal).
inline SymEigen3 sym_eigen3(const SymMat3& m_in) {
    SymEigen3 out;
    const double scale = m_in.max_abs();
    if (scale == 0.0) {
        out.smallest = {0.0, 0.0, 1.0};
        return out;
    }
    const double inv_scale = 1.0 / scale;
    SymMat3 m = m_in;
    m.a00 *= inv_scale;
    m.a01 *= inv_scale;
    m.a02 *= inv_scale;
    m.a11 *= inv_scale;
    m.a12 *= inv_scale;
    m.a22 *= inv_scale;

    const double p1 = m.a01 * m.a01 + m.a02 * m.a02 + m.a12 * m.a12;
    std::array<double, 3> eig;
    if (p1 <= 1e-30) {
        eig = {m.a00, m.a11, m.a22};
    } else {
        const double q = (m.a00 + m.a11 + m.a22) / 3.0;
        const double p2 = (m.a00 - q) * (m.a00 - q) + (m.a11 - q) * (m.a11 - q) +
                          (m.a22 - q) * (m.a22 - q) + 2.0 * p1;
        const double p = std::sqrt(p2 / 6.0);
        // B = (A - qI) / p ; r = det(B) / 2 in [-1, 1]
        const double b00 = (m.a00 - q) / p, b11 = (m.a11 - q) / p, b22 = (m.a22 - q) / p;
        const double b01 = m.a01 / p, b02 = m.a02 / p, b12 = m.a12 / p;
        double r = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                    b02 * (b01 * b12 - b11 * b02)) /
                   2.0;
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        eig[0] = q + 2.0 * p * std::cos(phi);
        eig[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
        eig[1] = 3.0 * q - eig[0] - eig[2];

        const auto poly = detail::char_poly(m);
        for (double& x : eig) x = detail::newton_polish(x, poly);
    }
    std::sort(eig.begin(), eig.end(), std::greater<>());

    out.values = {eig[0] * scale, eig[1] * scale, eig[2] * scale};
    out.smallest = detail::eigenvector_for(m, eig[2]);
    return out;
}

}  // namespace voxpyr
