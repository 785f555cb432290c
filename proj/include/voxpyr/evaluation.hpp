#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "voxpyr/complexity.hpp"
#include "voxpyr/normals.hpp"
#include "voxpyr/parallel.hpp"
#include "voxpyr/point_cloud.hpp"
#include "voxpyr/pyramid.hpp"
#include "voxpyr/spatial_hash.hpp"
#include "voxpyr/voxel_grid.hpp"

namespace voxpyr {

/// Symmetric Chamfer distance: sum of the two directed mean nearest-neighbor
/// distances (unsquared). Not a metric; symmetric by construction.
inline double chamfer_distance(const PointCloud& a, const PointCloud& b, int threads = 1) {
    if (a.empty() || b.empty()) throw error("chamfer_distance: empty cloud");

    UniformGridIndex index_a(a.points);
    UniformGridIndex index_b(b.points);

    auto directed_mean = [&](const std::vector<Vec3>& from, const UniformGridIndex& to) {
        std::vector<double> d(from.size());
        parallel_for(from.size(), threads,
                     [&](std::size_t i) { d[i] = to.nearest_distance(from[i]); });
        return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(from.size());
    };
    return directed_mean(a.points, index_b) + directed_mean(b.points, index_a);
}

/// Point-cloud F1 at match radius tau_r: precision over pred, recall over
/// gt, harmonic mean (0 when both vanish).
inline double f1_point_cloud(const PointCloud& pred, const PointCloud& gt, double radius,
                             int threads = 1) {
    if (pred.empty() || gt.empty()) throw error("f1_point_cloud: empty cloud");
    if (!(radius > 0.0)) throw usage_error("f1_point_cloud: radius must be > 0");

    UniformGridIndex index_pred(pred.points);
    UniformGridIndex index_gt(gt.points);

    auto matched_fraction = [&](const std::vector<Vec3>& from, const UniformGridIndex& to) {
        std::vector<std::uint8_t> hit(from.size(), 0);
        parallel_for(from.size(), threads, [&](std::size_t i) {
            hit[i] = to.nearest_distance(from[i]) <= radius ? 1 : 0;
        });
        const double n = static_cast<double>(from.size());
        return std::accumulate(hit.begin(), hit.end(), 0.0) / n;
    };
    const double precision = matched_fraction(pred.points, index_gt);
    const double recall = matched_fraction(gt.points, index_pred);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

/// Occupancy intersection-over-union; two entirely empty grids agree
/// vacuously (1.0).
inline double geometric_iou(const OccupancyGrid& a, const OccupancyGrid& b) {
    if (a.resolution() != b.resolution())
        throw usage_error("geometric_iou: resolution mismatch (" +
                          std::to_string(a.resolution()) + " vs " +
                          std::to_string(b.resolution()) + ")");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.cell_count(); ++i) {
        const bool va = a.at(i), vb = b.at(i);
        inter += (va && vb) ? 1 : 0;
        uni += (va || vb) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct VoxelClassificationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double iou = 0.0;
};

/// Binary confusion-matrix scores over all R^3 cells, positive class =
/// occupied. Precision/recall are 0 when their denominators vanish; IoU of
/// two empty grids is 1 to match geometric_iou.
inline VoxelClassificationMetrics voxel_classification_metrics(const OccupancyGrid& pred,
                                                               const OccupancyGrid& gt) {
    if (pred.resolution() != gt.resolution())
        throw usage_error("voxel_classification_metrics: resolution mismatch (" +
                          std::to_string(pred.resolution()) + " vs " +
                          std::to_string(gt.resolution()) + ")");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < pred.cell_count(); ++i) {
        const bool p = pred.at(i), g = gt.at(i);
        if (p && g)
            ++tp;
        else if (p && !g)
            ++fp;
        else if (!p && g)
            ++fn;
        else
            ++tn;
    }
    VoxelClassificationMetrics m;
    const double total = static_cast<double>(tp + fp + fn + tn);
    m.accuracy = static_cast<double>(tp + tn) / total;
    m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall > 0.0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.iou = (tp + fp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fp + fn) : 1.0;
    return m;
}

struct PipelineTimings {
    double total = 0.0;      // seconds; data_prep + fit
    double data_prep = 0.0;  // normalize (+ normal estimation) + voxelize
    double fit = 0.0;        // metrics + thresholds + classify + merge (+ downstream pass)
    double per_batch = 0.0;
    double shapes_per_second = 0.0;
};

struct EvalReport {
    double chamfer = 0.0;
    double f1_pc = 0.0;
    double geo_iou = 0.0;
    double voxel_accuracy = 0.0;
    double voxel_precision = 0.0;
    double voxel_recall = 0.0;
    double voxel_f1 = 0.0;
    double voxel_iou = 0.0;
    PipelineTimings timings;
};

inline void write_report_json(const EvalReport& r, std::ostream& os) {
    char buf[512];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "{\n"
       << "  \"chamfer\": " << num(r.chamfer) << ",\n"
       << "  \"f1_pc\": " << num(r.f1_pc) << ",\n"
       << "  \"geo_iou\": " << num(r.geo_iou) << ",\n"
       << "  \"voxel_accuracy\": " << num(r.voxel_accuracy) << ",\n"
       << "  \"voxel_precision\": " << num(r.voxel_precision) << ",\n"
       << "  \"voxel_recall\": " << num(r.voxel_recall) << ",\n"
       << "  \"voxel_f1\": " << num(r.voxel_f1) << ",\n"
       << "  \"voxel_iou\": " << num(r.voxel_iou) << ",\n"
       << "  \"timings\": {\n"
       << "    \"total\": " << num(r.timings.total) << ",\n"
       << "    \"data_prep\": " << num(r.timings.data_prep) << ",\n"
       << "    \"fit\": " << num(r.timings.fit) << ",\n"
       << "    \"per_batch\": " << num(r.timings.per_batch) << ",\n"
       << "    \"shapes_per_second\": " << num(r.timings.shapes_per_second) << "\n"
       << "  }\n"
       << "}\n";
}

inline void write_report_table(const EvalReport& r, std::ostream& os) {
    char line[160];
    auto row = [&](const char* name, double v) {
        std::snprintf(line, sizeof(line), "%-18s %14.6g\n", name, v);
        os << line;
    };
    row("chamfer", r.chamfer);
    row("f1_pc", r.f1_pc);
    row("geo_iou", r.geo_iou);
    row("voxel_accuracy", r.voxel_accuracy);
    row("voxel_precision", r.voxel_precision);
    row("voxel_recall", r.voxel_recall);
    row("voxel_f1", r.voxel_f1);
    row("voxel_iou", r.voxel_iou);
    row("t_total_s", r.timings.total);
    row("t_data_prep_s", r.timings.data_prep);
    row("t_fit_s", r.timings.fit);
    row("t_per_batch_s", r.timings.per_batch);
    row("shapes_per_s", r.timings.shapes_per_second);
}

enum class PipelineMode { drmsv, frv };

struct PipelineOptions {
    GridConfig grid;
    PipelineMode mode = PipelineMode::drmsv;
    int threads = 1;
    int normals_k = 16;
    double f1_radius = 0.0;  // 0 -> one cell edge (1/R)
    // Per-unit stand-in for the downstream consumer that would train on the
    // emitted voxel units; its cost scales with unit count, which is where
    // the adaptive pyramid saves time over the fixed grid.
    bool simulate_downstream = false;
    int downstream_iters = 200;
};

struct PipelineRun {
    PointCloud normalized;
    VoxelGrid grid{GridConfig{}, ""};
    std::optional<VoxelPyramid> pyramid;
    PointCloud reconstruction;
    std::size_t unit_count = 0;        // pyramid leaves, or R^3 for the fixed grid
    double downstream_checksum = 0.0;  // keeps the simulated pass observable
    EvalReport report;
};

namespace detail {

inline double downstream_unit_work(const Vec3& center, double size, int iters) {
    double acc = center.x + 2.0 * center.y + 4.0 * center.z + size;
    for (int i = 0; i < iters; ++i) acc = 0.999 * acc + 1e-3 * std::sin(acc) + 1e-4;
    return acc;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Full pipeline with wall-clock segmentation: data_prep covers
/// normalize/normals/voxelize, fit covers metrics/thresholds/classify/merge
/// and the optional downstream pass. Quality metrics are computed outside
/// the timed span.
inline PipelineRun timed_pipeline(const PointCloud& raw, const PipelineOptions& opts) {
    validate_grid_config(opts.grid);
    PipelineRun run;

    const detail::Stopwatch total_clock;
    {
        const detail::Stopwatch clock;
        run.normalized = normalize_to_unit_cube(raw).cloud;
        if (!run.normalized.has_normals()) {
            if (run.normalized.size() < 3)
                throw error("pipeline: cloud too small to estimate normals");
            const int k = std::min<int>(opts.normals_k,
                                        static_cast<int>(run.normalized.size()));
            run.normalized = estimate_normals(run.normalized, std::max(3, k), opts.threads);
        }
        run.grid = voxelize(run.normalized, opts.grid);
        run.report.timings.data_prep = clock.seconds();
    }

    {
        const detail::Stopwatch clock;
        if (opts.mode == PipelineMode::drmsv) {
            compute_metrics(run.grid, run.normalized, opts.threads);
            const ThresholdSet thresholds = compute_thresholds(run.grid, opts.grid);
            classify_voxels(run.grid, thresholds);
            run.pyramid = build_pyramid(run.grid);
            run.unit_count = run.pyramid->leaves.size();
            if (opts.simulate_downstream) {
                for (const PyramidNode& n : run.pyramid->leaves)
                    run.downstream_checksum += detail::downstream_unit_work(
                        leaf_center(n, run.pyramid->base_resolution),
                        static_cast<double>(n.size()) / run.pyramid->base_resolution,
                        opts.downstream_iters);
            }
        } else {
            const int r = opts.grid.resolution;
            run.unit_count = static_cast<std::size_t>(r) * r * r;
            if (opts.simulate_downstream) {
                const double size = 1.0 / r;
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        for (int k = 0; k < r; ++k)
                            run.downstream_checksum += detail::downstream_unit_work(
                                {(i + 0.5) * size, (j + 0.5) * size, (k + 0.5) * size}, size,
                                opts.downstream_iters);
            }
        }
        run.report.timings.fit = clock.seconds();
    }
    run.report.timings.total = total_clock.seconds();
    run.report.timings.per_batch = run.report.timings.total;
    run.report.timings.shapes_per_second =
        run.report.timings.total > 0.0 ? 1.0 / run.report.timings.total : 0.0;

    if (opts.mode == PipelineMode::drmsv) {
        run.reconstruction = pyramid_to_points(*run.pyramid);
    } else {
        for (const auto& [idx, cell] : run.grid.cells()) {
            if (cell.empty()) continue;
            const double size = 1.0 / run.grid.resolution();
            run.reconstruction.points.push_back(
                {(idx.i + 0.5) * size, (idx.j + 0.5) * size, (idx.k + 0.5) * size});
        }
        run.reconstruction.source_bounds = run.reconstruction.bounds();
    }

    const OccupancyGrid gt_occ = occupancy_grid(run.grid);
    const OccupancyGrid pred_occ =
        occupancy_grid(voxelize(run.reconstruction, opts.grid));
    const double radius = opts.f1_radius > 0.0 ? opts.f1_radius : 1.0 / opts.grid.resolution;

    run.report.chamfer = chamfer_distance(run.reconstruction, run.normalized, opts.threads);
    run.report.f1_pc = f1_point_cloud(run.reconstruction, run.normalized, radius, opts.threads);
    run.report.geo_iou = geometric_iou(pred_occ, gt_occ);
    const VoxelClassificationMetrics vm = voxel_classification_metrics(pred_occ, gt_occ);
    run.report.voxel_accuracy = vm.accuracy;
    run.report.voxel_precision = vm.precision;
    run.report.voxel_recall = vm.recall;
    run.report.voxel_f1 = vm.f1;
    run.report.voxel_iou = vm.iou;
    return run;
}

struct BatchResult {
    std::vector<PipelineRun> runs;
    PipelineTimings timings;  // totals across the batch, per_batch/shapes_per_second derived
};

inline BatchResult timed_pipeline_batch(const std::vector<PointCloud>& clouds,
                                        const PipelineOptions& opts) {
    if (clouds.empty()) throw usage_error("timed_pipeline_batch: empty batch");
    BatchResult out;
    out.runs.reserve(clouds.size());
    for (const PointCloud& cloud : clouds) {
        out.runs.push_back(timed_pipeline(cloud, opts));
        const PipelineTimings& t = out.runs.back().report.timings;
        out.timings.total += t.total;
        out.timings.data_prep += t.data_prep;
        out.timings.fit += t.fit;
    }
    const double n = static_cast<double>(clouds.size());
    out.timings.per_batch = out.timings.total / n;
    out.timings.shapes_per_second = out.timings.total > 0.0 ? n / out.timings.total : 0.0;
    return out;
}

}  // namespace voxpyr
