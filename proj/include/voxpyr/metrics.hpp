#pragma once

#include <array>
#include <string>

#include "voxpyr/error.hpp"

namespace voxpyr {

enum class Metric {
    density = 0,
    roughness,
    normal_variation,
    linearity,
    planarity,
    entropy,
    curvature,
};

inline constexpr int kMetricCount = 7;

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::density: return "d";
        case Metric::roughness: return "sigma_s";
        case Metric::normal_variation: return "normal_variation";
        case Metric::linearity: return "lambda_linear";
        case Metric::planarity: return "lambda_planar";
        case Metric::entropy: return "H_s";
        case Metric::curvature: return "kappa";
    }
    return "?";
}

inline Metric metric_from_name(const std::string& name) {
    for (int i = 0; i < kMetricCount; ++i)
        if (name == metric_name(static_cast<Metric>(i))) return static_cast<Metric>(i);
    throw usage_error("unknown metric name '" + name + "'");
}

/// The seven per-voxel complexity scores. normal_variation stores
/// 1 - cos(theta) so that, like every other field, higher means more complex.
struct ComplexityMetrics {
    double density = 0.0;
    double roughness = 0.0;
    double normal_variation = 0.0;
    double linearity = 0.0;
    double planarity = 0.0;
    double entropy = 0.0;
    double curvature = 0.0;
    bool degenerate = false;  // < 3 points or zero covariance

    double value(Metric m) const {
        switch (m) {
            case Metric::density: return density;
            case Metric::roughness: return roughness;
            case Metric::normal_variation: return normal_variation;
            case Metric::linearity: return linearity;
            case Metric::planarity: return planarity;
            case Metric::entropy: return entropy;
            case Metric::curvature: return curvature;
        }
        return 0.0;
    }
};

enum class CellLabel { unlabeled, empty, non_complex, complex };

inline const char* label_name(CellLabel l) {
    switch (l) {
        case CellLabel::unlabeled: return "unlabeled";
        case CellLabel::empty: return "empty";
        case CellLabel::non_complex: return "non_complex";
        case CellLabel::complex: return "complex";
    }
    return "?";
}

inline CellLabel label_from_name(const std::string& name) {
    if (name == "unlabeled") return CellLabel::unlabeled;
    if (name == "empty") return CellLabel::empty;
    if (name == "non_complex") return CellLabel::non_complex;
    if (name == "complex") return CellLabel::complex;
    throw usage_error("unknown cell label '" + name + "'");
}

}  // namespace voxpyr
