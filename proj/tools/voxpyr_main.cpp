// voxpyr: adaptive voxel pyramids over point clouds, plus the token-pooling
// demo. Exit codes: 0 success, 2 usage/validation error, 1 runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voxpyr/voxpyr.hpp"

namespace fs = std::filesystem;
using namespace voxpyr;

namespace {

GridConfig parse_grid_flags(int resolution, double percentile,
                            const std::vector<std::string>& tau_flags) {
    GridConfig cfg;
    cfg.resolution = resolution;
    cfg.percentile = percentile;
    for (const std::string& flag : tau_flags) {
        const auto eq = flag.find('=');
        if (eq == std::string::npos)
            throw usage_error("--tau expects metric=value, got '" + flag + "'");
        const Metric metric = metric_from_name(flag.substr(0, eq));
        cfg.fixed_thresholds[static_cast<int>(metric)] = std::stod(flag.substr(eq + 1));
    }
    validate_grid_config(cfg);
    return cfg;
}

PointCloud load_cloud_checked(const std::string& path) {
    if (!fs::exists(path)) throw usage_error("input file '" + path + "' does not exist");
    return load_point_cloud(path);
}

bool looks_like_grid_file(const std::string& path) {
    std::ifstream in(path);
    std::string tag;
    return static_cast<bool>(in >> tag) && tag == "resolution";
}

std::string stem_path(const std::string& path) {
    fs::path p(path);
    return (p.parent_path() / p.stem()).string();
}

struct VoxelizeArgs {
    std::string input;
    std::string out;
    std::string metrics_csv;
    std::string leaf_ply;
    std::string grid_out;
    int resolution = 16;
    double percentile = 75.0;
    std::vector<std::string> tau;
    int threads = 1;
    int normals_k = 16;
};

void run_voxelize(const VoxelizeArgs& args) {
    const GridConfig cfg = parse_grid_flags(args.resolution, args.percentile, args.tau);

    PointCloud cloud = normalize_to_unit_cube(load_cloud_checked(args.input)).cloud;
    if (!cloud.has_normals()) {
        if (cloud.size() < 3)
            throw usage_error("cloud has fewer than 3 points; cannot estimate normals");
        const int k = std::max(3, std::min<int>(args.normals_k, static_cast<int>(cloud.size())));
        cloud = estimate_normals(cloud, k, args.threads);
    }

    VoxelGrid grid = voxelize(cloud, cfg, args.input);
    compute_metrics(grid, cloud, args.threads);
    classify_voxels(grid, compute_thresholds(grid, cfg));
    const VoxelPyramid pyramid = build_pyramid(grid);

    {
        std::ofstream out(args.out);
        if (!out) throw usage_error("cannot write '" + args.out + "'");
        save_pyramid(pyramid, out);
    }
    const std::string metrics_path =
        args.metrics_csv.empty() ? stem_path(args.out) + ".metrics.csv" : args.metrics_csv;
    {
        std::ofstream out(metrics_path);
        if (!out) throw usage_error("cannot write '" + metrics_path + "'");
        write_metrics_csv(grid, out);
    }
    const std::string leaf_path =
        args.leaf_ply.empty() ? stem_path(args.out) + ".leaves.ply" : args.leaf_ply;
    save_ply_ascii(pyramid_to_points(pyramid), leaf_path);
    if (!args.grid_out.empty()) {
        std::ofstream out(args.grid_out);
        if (!out) throw usage_error("cannot write '" + args.grid_out + "'");
        save_grid(grid, out);
    }

    std::size_t complex_cells = 0;
    for (const auto& [idx, cell] : grid.cells())
        if (cell.label == CellLabel::complex) ++complex_cells;
    std::cout << "points " << cloud.size() << "\n"
              << "occupied_cells " << grid.occupied_cell_count() << "\n"
              << "complex_cells " << complex_cells << "\n"
              << "leaves " << pyramid.leaves.size() << "\n"
              << "rounds " << pyramid.rounds_executed << "\n";
}

struct EvalArgs {
    std::string pred;
    std::string gt;
    int resolution = 16;
    double radius = 0.0;
    std::string format = "text";
    int threads = 1;
};

void run_eval(const EvalArgs& args) {
    for (const std::string& path : {args.pred, args.gt})
        if (!fs::exists(path)) throw usage_error("input file '" + path + "' does not exist");

    const bool pred_is_grid = looks_like_grid_file(args.pred);
    const bool gt_is_grid = looks_like_grid_file(args.gt);

    EvalReport report;
    if (!pred_is_grid && !gt_is_grid) {
        const PointCloud pred = normalize_to_unit_cube(load_cloud_checked(args.pred)).cloud;
        const PointCloud gt = normalize_to_unit_cube(load_cloud_checked(args.gt)).cloud;
        GridConfig cfg;
        cfg.resolution = args.resolution;
        validate_grid_config(cfg);
        const double radius = args.radius > 0.0 ? args.radius : 1.0 / args.resolution;

        report.chamfer = chamfer_distance(pred, gt, args.threads);
        report.f1_pc = f1_point_cloud(pred, gt, radius, args.threads);
        const OccupancyGrid pred_occ = occupancy_grid(voxelize(pred, cfg));
        const OccupancyGrid gt_occ = occupancy_grid(voxelize(gt, cfg));
        report.geo_iou = geometric_iou(pred_occ, gt_occ);
        const VoxelClassificationMetrics vm = voxel_classification_metrics(pred_occ, gt_occ);
        report.voxel_accuracy = vm.accuracy;
        report.voxel_precision = vm.precision;
        report.voxel_recall = vm.recall;
        report.voxel_f1 = vm.f1;
        report.voxel_iou = vm.iou;
    } else {
        // occupancy-only comparison; grids carry no point coordinates
        auto load_occ = [&](const std::string& path, bool is_grid,
                            int fallback_resolution) -> OccupancyGrid {
            if (is_grid) {
                std::ifstream in(path);
                return occupancy_grid(load_grid(in));
            }
            GridConfig cfg;
            cfg.resolution = fallback_resolution;
            validate_grid_config(cfg);
            const PointCloud cloud = normalize_to_unit_cube(load_cloud_checked(path)).cloud;
            return occupancy_grid(voxelize(cloud, cfg));
        };
        int resolution = args.resolution;
        if (pred_is_grid) {
            std::ifstream in(args.pred);
            resolution = load_grid(in).resolution();
        } else if (gt_is_grid) {
            std::ifstream in(args.gt);
            resolution = load_grid(in).resolution();
        }
        const OccupancyGrid pred_occ = load_occ(args.pred, pred_is_grid, resolution);
        const OccupancyGrid gt_occ = load_occ(args.gt, gt_is_grid, resolution);
        report.geo_iou = geometric_iou(pred_occ, gt_occ);
        const VoxelClassificationMetrics vm = voxel_classification_metrics(pred_occ, gt_occ);
        report.voxel_accuracy = vm.accuracy;
        report.voxel_precision = vm.precision;
        report.voxel_recall = vm.recall;
        report.voxel_f1 = vm.f1;
        report.voxel_iou = vm.iou;
        std::cerr << "note: grid inputs carry no points; chamfer and f1_pc reported as 0\n";
    }

    if (args.format == "json")
        write_report_json(report, std::cout);
    else
        write_report_table(report, std::cout);
}

struct BenchArgs {
    std::string fixtures;
    int resolution = 16;
    double percentile = 75.0;
    std::string mode = "both";
    int threads = 1;
    int repeat = 1;
    int downstream_iters = 200;
    int normals_k = 16;
};

void run_bench(const BenchArgs& args) {
    if (!fs::is_directory(args.fixtures))
        throw usage_error("fixture directory '" + args.fixtures + "' does not exist");

    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(args.fixtures)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".ply" || ext == ".xyz") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw usage_error("no .ply or .xyz fixtures in '" + args.fixtures + "'");

    std::vector<PointCloud> clouds;
    for (const std::string& path : paths) clouds.push_back(load_cloud_checked(path));

    PipelineOptions opts;
    opts.grid = parse_grid_flags(args.resolution, args.percentile, {});
    opts.threads = args.threads;
    opts.normals_k = args.normals_k;
    opts.simulate_downstream = true;
    opts.downstream_iters = args.downstream_iters;

    struct Row {
        std::string mode;
        PipelineTimings timings;
        std::vector<std::size_t> units;
    };
    std::vector<Row> rows;
    auto run_mode = [&](PipelineMode mode, const std::string& name) {
        PipelineOptions mode_opts = opts;
        mode_opts.mode = mode;
        Row row;
        row.mode = name;
        double best_total = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < std::max(1, args.repeat); ++rep) {
            const BatchResult result = timed_pipeline_batch(clouds, mode_opts);
            if (result.timings.total < best_total) {
                best_total = result.timings.total;
                row.timings = result.timings;
                row.units.clear();
                for (const PipelineRun& run : result.runs) row.units.push_back(run.unit_count);
            }
        }
        rows.push_back(std::move(row));
    };
    if (args.mode == "both" || args.mode == "frv-only") run_mode(PipelineMode::frv, "frv");
    if (args.mode == "both" || args.mode == "drmsv-only")
        run_mode(PipelineMode::drmsv, "dr-msv");

    std::printf("%-8s %12s %14s %12s %14s %14s %10s\n", "mode", "total_s", "data_prep_s",
                "fit_s", "per_batch_s", "shapes_per_s", "units");
    for (const Row& row : rows) {
        std::size_t total_units = 0;
        for (std::size_t u : row.units) total_units += u;
        std::printf("%-8s %12.4f %14.4f %12.4f %14.4f %14.3f %10zu\n", row.mode.c_str(),
                    row.timings.total, row.timings.data_prep, row.timings.fit,
                    row.timings.per_batch, row.timings.shapes_per_second, total_units);
    }
    std::printf("\n%-28s %10s", "fixture", "n_points");
    for (const Row& row : rows) std::printf(" %12s", (row.mode + "_units").c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::printf("%-28s %10zu", fs::path(paths[i]).filename().string().c_str(),
                    clouds[i].size());
        for (const Row& row : rows) std::printf(" %12zu", row.units[i]);
        std::printf("\n");
    }
}

struct PoolArgs {
    std::string tokens;
    std::string targets;
    bool synthetic = false;
    int seq_len = 6;
    int width = 4;
    int samples = 32;
    std::string variant = "tap_res_learnt";
    bool train = false;
    int epochs = 200;
    double step = 0.2;
    bool grad_check = false;
    std::uint64_t seed = 0;
    std::string params_in;
    std::string params_out;
    std::string loss_out;
};

int run_pool(const PoolArgs& args) {
    const PoolingVariant variant = variant_from_name(args.variant);

    if (args.grad_check) {
        GradCheckConfig cfg;
        cfg.seed = args.seed;
        const GradCheckResult result = gradient_check(cfg);
        std::printf("grad_check configurations %d\n", result.configurations);
        std::printf("grad_check max_rel_error %.3e\n", result.max_rel_error);
        if (result.max_rel_error >= 1e-4) {
            std::cerr << "gradient check failed (>= 1e-4)\n";
            return 1;
        }
        return 0;
    }

    if (!args.synthetic && args.tokens.empty())
        throw usage_error("pool needs --tokens FILE or --synthetic");

    if (args.train) {
        std::vector<ToySample> data;
        if (args.synthetic) {
            data = make_synthetic_pooling_task(args.samples, args.seq_len, args.width, args.seed);
        } else {
            if (args.targets.empty())
                throw usage_error("--train with --tokens also needs --targets");
            std::ifstream tin(args.tokens);
            if (!tin) throw usage_error("cannot open '" + args.tokens + "'");
            std::ifstream gin(args.targets);
            if (!gin) throw usage_error("cannot open '" + args.targets + "'");
            ToySample sample;
            sample.tokens = load_token_csv(tin);
            const TokenMatrix target = load_token_csv(gin);
            if (target.rows != 1 || target.cols != sample.tokens.cols)
                throw usage_error("--targets must hold one row of the token width");
            sample.target = target.data;
            data.push_back(std::move(sample));
        }
        const TrainResult result = train_toy(data, variant, args.epochs, args.step, args.seed);
        std::printf("initial_loss %.17g\n", result.loss_curve.front());
        std::printf("final_loss %.17g\n", result.loss_curve.back());
        if (!args.loss_out.empty()) {
            std::ofstream out(args.loss_out);
            if (!out) throw usage_error("cannot write '" + args.loss_out + "'");
            save_loss_curve(result.loss_curve, out);
        }
        if (!args.params_out.empty()) {
            std::ofstream out(args.params_out);
            if (!out) throw usage_error("cannot write '" + args.params_out + "'");
            save_params(result.params, out);
        }
        return 0;
    }

    // single forward pass
    TokenMatrix tokens;
    if (args.synthetic) {
        tokens = make_synthetic_pooling_task(1, args.seq_len, args.width, args.seed)
                     .front()
                     .tokens;
    } else {
        std::ifstream in(args.tokens);
        if (!in) throw usage_error("cannot open '" + args.tokens + "'");
        tokens = load_token_csv(in);
    }
    PoolingParams params;
    if (!args.params_in.empty()) {
        std::ifstream in(args.params_in);
        if (!in) throw usage_error("cannot open '" + args.params_in + "'");
        params = load_params(in);
        if (params.width != tokens.cols)
            throw usage_error("params width does not match token width");
    } else {
        params = PoolingParams::random_init(tokens.cols, args.seed);
    }

    const PoolingOutput out = forward(tokens, params, variant);
    std::printf("variant %s\n", variant_name(variant));
    std::printf("lambda %.17g\n", out.lambda_used);
    std::printf("alpha");
    for (double a : out.alpha) std::printf(" %.17g", a);
    std::printf("\ng");
    for (double v : out.g) std::printf(" %.17g", v);
    std::printf("\n");
    if (!args.params_out.empty()) {
        std::ofstream pout(args.params_out);
        if (!pout) throw usage_error("cannot write '" + args.params_out + "'");
        save_params(params, pout);
    }
    return 0;
}

struct GenArgs {
    std::string out;
    std::size_t points = 8192;
    std::uint64_t seed = 0;
    std::string format = "ply";
    std::vector<std::string> shapes{"plane", "sphere", "cube_edges", "line", "mixed"};
};

void run_gen_fixtures(const GenArgs& args) {
    fs::create_directories(args.out);
    const CloudFormat format =
        args.format == "xyz" ? CloudFormat::xyz : CloudFormat::ply_ascii;
    const std::string ext = args.format == "xyz" ? ".xyz" : ".ply";

    for (const std::string& shape : args.shapes) {
        PointCloud cloud;
        if (shape == "plane") cloud = fixtures::make_plane(args.points, args.seed);
        else if (shape == "sphere") cloud = fixtures::make_sphere(args.points, args.seed + 100);
        else if (shape == "cube_edges")
            cloud = fixtures::make_cube_edges(args.points, args.seed + 200);
        else if (shape == "line") cloud = fixtures::make_line(args.points, args.seed + 300);
        else if (shape == "mixed") cloud = fixtures::make_mixed(args.points, args.seed + 400);
        else throw usage_error("unknown shape '" + shape + "'");

        const std::string path = (fs::path(args.out) / (shape + ext)).string();
        save_point_cloud(cloud, path, format);
        std::cout << path << " " << cloud.size() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive voxel pyramids over point clouds"};
    app.set_config("--config", "", "key=value configuration file");
    app.require_subcommand(1);

    VoxelizeArgs vox;
    CLI::App* vox_cmd = app.add_subcommand(
        "voxelize", "full pipeline: normalize, classify, merge, write pyramid");
    vox_cmd->add_option("--input", vox.input, "point cloud (.ply or .xyz)")->required();
    vox_cmd->add_option("--out", vox.out, "pyramid output path")->required();
    vox_cmd->add_option("--resolution", vox.resolution, "cells per axis (power of two)");
    vox_cmd->add_option("--percentile", vox.percentile, "threshold percentile");
    vox_cmd->add_option("--metrics-csv", vox.metrics_csv, "metrics CSV path");
    vox_cmd->add_option("--leaf-ply", vox.leaf_ply, "leaf-center PLY path");
    vox_cmd->add_option("--grid-out", vox.grid_out, "classified grid dump path");
    vox_cmd->add_option("--tau", vox.tau, "fixed threshold override metric=value");
    vox_cmd->add_option("--threads", vox.threads, "worker threads");
    vox_cmd->add_option("--normals-k", vox.normals_k, "neighbors for normal estimation");
    vox_cmd->callback([&] { run_voxelize(vox); });

    EvalArgs eval;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "compare a prediction against ground truth");
    eval_cmd->add_option("--pred", eval.pred, "predicted cloud or grid file")->required();
    eval_cmd->add_option("--gt", eval.gt, "ground-truth cloud or grid file")->required();
    eval_cmd->add_option("--resolution", eval.resolution, "occupancy resolution");
    eval_cmd->add_option("--radius", eval.radius, "f1 match radius (default 1/R)");
    eval_cmd->add_option("--format", eval.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    eval_cmd->add_option("--threads", eval.threads, "worker threads");
    eval_cmd->callback([&] { run_eval(eval); });

    BenchArgs bench;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "time the pipeline across a fixture directory");
    bench_cmd->add_option("--fixtures", bench.fixtures, "fixture directory")->required();
    bench_cmd->add_option("--resolution", bench.resolution, "cells per axis");
    bench_cmd->add_option("--percentile", bench.percentile, "threshold percentile");
    bench_cmd->add_option("--mode", bench.mode, "both, frv-only, or drmsv-only")
        ->check(CLI::IsMember({"both", "frv-only", "drmsv-only"}));
    bench_cmd->add_option("--threads", bench.threads, "worker threads");
    bench_cmd->add_option("--repeat", bench.repeat, "repetitions, best total kept");
    bench_cmd->add_option("--downstream-iters", bench.downstream_iters,
                          "simulated per-unit consumer iterations");
    bench_cmd->add_option("--normals-k", bench.normals_k, "neighbors for normal estimation");
    bench_cmd->callback([&] { run_bench(bench); });

    PoolArgs pool;
    int pool_exit = 0;
    CLI::App* pool_cmd = app.add_subcommand("pool", "token-level adaptive pooling demo");
    pool_cmd->add_option("--tokens", pool.tokens, "token matrix CSV");
    pool_cmd->add_flag("--synthetic", pool.synthetic, "generate synthetic tokens");
    pool_cmd->add_option("--S", pool.seq_len, "synthetic sequence length");
    pool_cmd->add_option("--G", pool.width, "synthetic feature width");
    pool_cmd->add_option("--samples", pool.samples, "synthetic training samples");
    pool_cmd->add_option("--variant", pool.variant,
                         "baseline_max, tap_only, tap_res_fixed, tap_res_learnt, "
                         "tap_weight_only");
    pool_cmd->add_flag("--train", pool.train, "run the toy trainer");
    pool_cmd->add_option("--epochs", pool.epochs, "training epochs");
    pool_cmd->add_option("--step", pool.step, "gradient-descent step size");
    pool_cmd->add_flag("--grad-check", pool.grad_check, "run the finite-difference suite");
    pool_cmd->add_option("--seed", pool.seed, "rng seed");
    pool_cmd->add_option("--targets", pool.targets, "target CSV for --train with --tokens");
    pool_cmd->add_option("--params-in", pool.params_in, "load pooling parameters");
    pool_cmd->add_option("--params-out", pool.params_out, "save pooling parameters");
    pool_cmd->add_option("--loss-out", pool.loss_out, "loss curve CSV path");
    pool_cmd->callback([&] { pool_exit = run_pool(pool); });

    GenArgs gen;
    CLI::App* gen_cmd =
        app.add_subcommand("gen-fixtures", "write the synthetic fixture shapes");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--points", gen.points, "points per shape");
    gen_cmd->add_option("--seed", gen.seed, "rng seed");
    gen_cmd->add_option("--format", gen.format, "ply or xyz")
        ->check(CLI::IsMember({"ply", "xyz"}));
    gen_cmd->add_option("--shapes", gen.shapes, "subset of shapes to generate");
    gen_cmd->callback([&] { run_gen_fixtures(gen); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return pool_exit;
}
