/**
 * @file main.cpp
 * @brief gaussbox command line: conversions, distances, losses, scores,
 *        gradient checks, assignment experiments, point-set optimization,
 *        boundary sweeps, and annotation ingestion.
 *
 * Exit codes: 0 success, 2 usage or parse error, 3 degenerate or empty
 * input, 4 numerical divergence. stdout carries machine-readable payloads
 * only; diagnostics go to stderr.
 */

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "gaussbox/io.hpp"
#include "gaussbox/random.hpp"

namespace {

using namespace gaussbox;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitDiverged = 4;

std::string read_stdin() {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
}

/// Payload argument: "-" for stdin, inline JSON (starts with '{'), or a path.
Json json_from_arg(const std::string& arg) {
    if (arg == "-") return Json::parse(read_stdin());
    if (!arg.empty() && arg.front() == '{') return Json::parse(arg);
    return Json::parse(read_text_file(arg));
}

void emit(const std::string& payload, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << payload;
        if (payload.empty() || payload.back() != '\n') std::cout << '\n';
    } else {
        write_text_file(output_path, payload);
    }
}

void emit(const Json& j, const std::string& output_path) {
    emit(j.dump(2), output_path);
}

struct ConvertOptions {
    std::string from, to, in, output;
};

int run_convert(const ConvertOptions& opt) {
    const Json j = json_from_arg(opt.in.empty() ? "-" : opt.in);
    const Payload payload = payload_from_json(j);

    const auto expect_kind = [&](PayloadKind kind, const char* what) {
        if (payload.kind != kind) {
            throw InvalidInputError(std::string("payload does not match --from ") + what);
        }
    };
    if (opt.from == "obb") {
        expect_kind(PayloadKind::Obb, "obb");
    } else if (opt.from == "qbb") {
        expect_kind(PayloadKind::Points, "qbb");
        if (payload.points.size() != 4) {
            throw InvalidInputError("--from qbb expects exactly 4 points, got " +
                                    std::to_string(payload.points.size()));
        }
    } else if (opt.from == "points") {
        expect_kind(PayloadKind::Points, "points");
    } else if (opt.from == "gaussian") {
        expect_kind(PayloadKind::Gaussian, "gaussian");
    }

    const Gaussian2 g = payload.as_gaussian();
    if (opt.to == "gaussian") {
        emit(to_json(g), opt.output);
    } else {
        emit(to_json(gaussian_to_obb(g)), opt.output);
    }
    return kExitOk;
}

struct PairOptions {
    std::string gt, pred, output;
    std::string metric = "kld";
    std::string loss_name = "lkld";
    bool candidates = false;
};

int run_distance(const PairOptions& opt) {
    const MetricKind metric = metric_kind_from_string(opt.metric);
    const Gaussian2 g = payload_from_json(json_from_arg(opt.gt)).as_gaussian();
    const Gaussian2 p = payload_from_json(json_from_arg(opt.pred)).as_gaussian();
    emit(Json{{"metric", opt.metric}, {"distance", metric_distance(metric, g, p)}}, opt.output);
    return kExitOk;
}

int run_loss(const PairOptions& opt) {
    const LossKind kind = loss_kind_from_string(opt.loss_name);
    const Gaussian2 g = payload_from_json(json_from_arg(opt.gt)).as_gaussian();
    const Gaussian2 p = payload_from_json(json_from_arg(opt.pred)).as_gaussian();
    const double d = metric_distance(paired_metric(kind), g, p);
    Json j{{"loss", opt.loss_name}, {"value", loss_from_distance(kind, d)}, {"distance", d}};
    if (opt.candidates) {
        Json rows = Json::array();
        for (const NormalizationCandidate& row : candidate_normalizations(paired_metric(kind))) {
            rows.push_back(Json{{"loss", row.loss_label},
                                {"score", row.score_label},
                                {"value", row.loss_fn(d)},
                                {"chosen", row.chosen}});
        }
        j["candidates"] = std::move(rows);
    }
    emit(j, opt.output);
    return kExitOk;
}

int run_score(const PairOptions& opt) {
    const MetricKind metric = metric_kind_from_string(opt.metric);
    const Gaussian2 g = payload_from_json(json_from_arg(opt.gt)).as_gaussian();
    const Gaussian2 p = payload_from_json(json_from_arg(opt.pred)).as_gaussian();
    const double d = metric_distance(metric, g, p);
    emit(Json{{"metric", opt.metric},
              {"score", score_from_distance(metric, d)},
              {"distance", d}},
         opt.output);
    return kExitOk;
}

struct GradCheckOptions {
    std::string loss_name = "all";
    std::uint64_t seed = 0;
    int trials = 25;
    std::string output;
};

int run_grad_check(const GradCheckOptions& opt) {
    std::vector<LossKind> kinds;
    if (opt.loss_name == "all") {
        kinds = {LossKind::Kld, LossKind::Bd, LossKind::Wd};
    } else {
        kinds = {loss_kind_from_string(opt.loss_name)};
    }
    std::mt19937_64 rng(opt.seed);
    double max_rel_err = 0.0;
    for (const LossKind kind : kinds) {
        for (int trial = 0; trial < opt.trials; ++trial) {
            Obb gt;
            gt.cx = uniform(rng, -10, 10);
            gt.cy = uniform(rng, -10, 10);
            gt.h = uniform(rng, 0.5, 4.0);
            gt.w = gt.h * uniform(rng, 1.0, 5.0);
            gt.theta = uniform(rng, -1.5, 1.5);
            Obb near = gt;
            near.cx += uniform(rng, -0.5, 0.5) * gt.w;
            near.cy += uniform(rng, -0.5, 0.5) * gt.h;
            const int k = (trial % 2 == 0) ? 9 : 4;
            const PointSetRep pts = jittered_point_set(near, k, 0.3, rng());
            const Gaussian2 gt_gauss = obb_to_gaussian(gt);
            const LossGradient analytic = loss_grad_points(kind, gt_gauss, pts);
            const LossGradient fd = fd_gradient(kind, gt_gauss, pts);
            double diff_sq = 0.0, ref_sq = 0.0;
            for (std::size_t i = 0; i < analytic.d_points.size(); ++i) {
                diff_sq += (analytic.d_points[i] - fd.d_points[i]).squaredNorm();
                ref_sq += fd.d_points[i].squaredNorm();
            }
            max_rel_err = std::max(max_rel_err, std::sqrt(diff_sq) / (std::sqrt(ref_sq) + 1e-12));
        }
    }
    const double tolerance = 1e-5;
    const bool pass = max_rel_err < tolerance;
    emit(Json{{"loss", opt.loss_name},
              {"trials", opt.trials},
              {"seed", opt.seed},
              {"max_relative_error", max_rel_err},
              {"tolerance", tolerance},
              {"pass", pass}},
         opt.output);
    return pass ? kExitOk : 1;
}

struct AssignOptions {
    std::string scene_path;
    bool generate = false;
    SceneConfig config;
    std::uint64_t seed = 0;
    std::string strategy = "atss";
    std::string metric = "kld";
    double pos_thr = 0.4;
    double neg_thr = 0.3;
    bool force_match = true;
    int candidates = 9;
    std::string output, csv, svg;
    std::string format = "json";
};

int run_assign(const AssignOptions& opt) {
    Scene scene;
    if (!opt.scene_path.empty()) {
        scene = scene_from_json(Json::parse(read_text_file(opt.scene_path)));
    } else if (opt.generate) {
        scene = gen_scene(opt.config, opt.seed);
    } else {
        throw InvalidInputError("assign needs --scene FILE or --gen");
    }

    StrategySpec strategy;
    strategy.kind = strategy_kind_from_string(opt.strategy);
    strategy.metric = metric_kind_from_string(opt.metric);
    strategy.pos_thr = opt.pos_thr;
    strategy.neg_thr = opt.neg_thr;
    strategy.force_match = opt.force_match;
    strategy.candidates_per_gt = opt.candidates;
    strategy.seed = opt.seed;

    const ExperimentResult result = run_assignment_experiment(scene, strategy);
    if (!opt.csv.empty()) write_text_file(opt.csv, assignment_csv(result.assignment));
    if (!opt.svg.empty()) write_text_file(opt.svg, scene_svg(scene));
    if (opt.format == "csv") {
        emit(assignment_csv(result.assignment), opt.output);
    } else if (opt.format == "svg") {
        emit(scene_svg(scene), opt.output);
    } else {
        emit(to_json(result.report), opt.output);
    }
    return kExitOk;
}

struct OptimizeOptions {
    std::string gt;
    std::string loss_name = "lwd";
    int points = kDefaultPointCount;
    double init_jitter = 0.2;
    int steps = kDefaultOptimizeSteps;
    double step_size = 0.0;  // 0 = per-kind default
    std::uint64_t seed = 0;
    std::string output, csv, svg;
};

int run_optimize(const OptimizeOptions& opt) {
    const Obb gt = obb_from_json(json_from_arg(opt.gt));
    const LossKind kind = loss_kind_from_string(opt.loss_name);
    const double step = opt.step_size > 0.0 ? opt.step_size : default_step_size(kind, gt);
    const PointSetRep init = jittered_point_set(gt, opt.points, opt.init_jitter, opt.seed);
    const OptimizationTrace trace = optimize_pointset(gt, init, kind, step, opt.steps);

    if (!opt.csv.empty()) write_text_file(opt.csv, trace_csv(trace));
    if (!opt.svg.empty()) write_text_file(opt.svg, optimize_svg(gt, trace));

    Json j{{"loss", opt.loss_name},
           {"step_size", step},
           {"steps_recorded", trace.steps.size()},
           {"initial_distance", trace.initial_distance},
           {"final_distance", trace.final_distance},
           {"converged", trace.converged()},
           {"diverged", trace.diverged}};
    j["terminal_obb"] = trace.terminal_obb ? to_json(*trace.terminal_obb) : Json(nullptr);
    if (trace.diverged) j["diagnostic"] = trace.diagnostic;
    emit(j, opt.output);

    if (trace.diverged || !trace.converged()) {
        std::cerr << "optimize: " << (trace.diverged ? trace.diagnostic : "did not converge")
                  << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}

struct IngestOptions {
    std::string dir;
    std::string output, csv;
    std::string format = "json";
};

int run_ingest(const IngestOptions& opt) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(opt.dir)) {
        throw DegenerateInputError("not a directory: " + opt.dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<ParseResult> parsed;
    for (const fs::path& file : files) {
        try {
            parsed.push_back(parse_dota_file(file));
        } catch (const IoError& e) {
            std::cerr << "ingest: " << e.what() << "\n";
        }
    }
    if (parsed.empty()) {
        throw DegenerateInputError("no parseable annotation files in " + opt.dir);
    }

    const DatasetSummary summary = summarize_dataset(parsed);
    Json j = to_json(summary);
    Json errors = Json::array();
    for (const ParseResult& file : parsed) {
        for (const ParseIssue& issue : file.errors) {
            errors.push_back(Json{{"file", issue.file},
                                  {"line", issue.line_number},
                                  {"message", issue.message}});
        }
        for (const ParseIssue& issue : file.warnings) {
            std::cerr << "ingest: " << issue.file << ":" << issue.line_number << ": "
                      << issue.message << "\n";
        }
    }
    j["errors"] = std::move(errors);
    j["files_parsed"] = parsed.size();

    if (!opt.csv.empty()) write_text_file(opt.csv, summary_csv(summary));
    if (opt.format == "csv") {
        emit(summary_csv(summary), opt.output);
    } else {
        emit(j, opt.output);
    }
    return kExitOk;
}

struct SweepOptions {
    std::string gt;
    std::string loss_name = "lkld";
    int resolution = 6284;
    std::string output, csv;
};

int run_sweep(const SweepOptions& opt) {
    const Obb gt = obb_from_json(json_from_arg(opt.gt));
    const LossKind kind = loss_kind_from_string(opt.loss_name);
    const SweepResult sweep = boundary_sweep(gt, kind, opt.resolution);
    if (!opt.csv.empty()) write_text_file(opt.csv, sweep_csv(sweep));
    emit(Json{{"loss", opt.loss_name},
              {"resolution", opt.resolution},
              {"gaussian_max_jump", sweep.gaussian_max_jump},
              {"gaussian_median_delta", sweep.gaussian_median_delta},
              {"param_max_jump", sweep.param_max_jump},
              {"param_median_delta", sweep.param_median_delta},
              {"param_max_jump_theta", sweep.param_max_jump_theta}},
         opt.output);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian representations for oriented boxes, quadrilaterals and point sets"};
    app.require_subcommand(1);

    std::function<int()> action;

    auto convert_opt = std::make_shared<ConvertOptions>();
    CLI::App* convert = app.add_subcommand("convert", "Convert between representations");
    convert->add_option("--from", convert_opt->from, "Input representation")
        ->required()
        ->check(CLI::IsMember({"obb", "qbb", "points", "gaussian"}));
    convert->add_option("--to", convert_opt->to, "Output representation")
        ->required()
        ->check(CLI::IsMember({"gaussian", "obb"}));
    convert->add_option("--in", convert_opt->in, "Payload file ('-' or omitted: stdin)");
    convert->add_option("--output", convert_opt->output, "Write result here instead of stdout");
    convert->callback(
        [convert_opt, &action] { action = [convert_opt] { return run_convert(*convert_opt); }; });

    auto pair_opt = std::make_shared<PairOptions>();
    const auto add_pair_flags = [&](CLI::App* cmd) {
        cmd->add_option("--gt", pair_opt->gt, "Ground-truth payload (file, '-', or inline JSON)")
            ->required();
        cmd->add_option("--pred", pair_opt->pred, "Prediction payload")->required();
        cmd->add_option("--output", pair_opt->output, "Write result here instead of stdout");
    };
    CLI::App* distance = app.add_subcommand("distance", "Gaussian distance between two payloads");
    add_pair_flags(distance);
    distance->add_option("--metric", pair_opt->metric, "kld|bd|wd")
        ->check(CLI::IsMember({"kld", "bd", "wd"}));
    distance->callback(
        [pair_opt, &action] { action = [pair_opt] { return run_distance(*pair_opt); }; });

    CLI::App* loss_cmd = app.add_subcommand("loss", "Normalized regression loss");
    add_pair_flags(loss_cmd);
    loss_cmd->add_option("--loss", pair_opt->loss_name, "lkld|lbd|lwd")
        ->check(CLI::IsMember({"lkld", "lbd", "lwd"}));
    loss_cmd->add_flag("--candidates", pair_opt->candidates,
                       "Also evaluate every candidate normalization");
    loss_cmd->callback([pair_opt, &action] { action = [pair_opt] { return run_loss(*pair_opt); }; });

    CLI::App* score_cmd = app.add_subcommand("score", "Normalized similarity score");
    add_pair_flags(score_cmd);
    score_cmd->add_option("--metric", pair_opt->metric, "kld|bd|wd")
        ->check(CLI::IsMember({"kld", "bd", "wd"}));
    score_cmd->callback(
        [pair_opt, &action] { action = [pair_opt] { return run_score(*pair_opt); }; });

    auto grad_opt = std::make_shared<GradCheckOptions>();
    CLI::App* grad = app.add_subcommand("grad-check", "Analytic vs finite-difference gradients");
    grad->add_option("--loss", grad_opt->loss_name, "lkld|lbd|lwd|all")
        ->check(CLI::IsMember({"lkld", "lbd", "lwd", "all"}));
    grad->add_option("--seed", grad_opt->seed, "Random seed");
    grad->add_option("--trials", grad_opt->trials, "Configurations per loss kind")
        ->check(CLI::PositiveNumber);
    grad->add_option("--output", grad_opt->output, "Write report here instead of stdout");
    grad->callback([grad_opt, &action] { action = [grad_opt] { return run_grad_check(*grad_opt); }; });

    auto assign_opt = std::make_shared<AssignOptions>();
    CLI::App* assign = app.add_subcommand("assign", "Label-assignment experiment");
    assign->add_option("--scene", assign_opt->scene_path, "Scene JSON file");
    assign->add_flag("--gen", assign_opt->generate, "Generate a synthetic scene");
    assign->add_option("--gts", assign_opt->config.num_gts, "Ground truths to generate");
    assign->add_option("--extent", assign_opt->config.extent, "Field extent");
    assign->add_option("--size-min", assign_opt->config.size_min, "Smallest long side");
    assign->add_option("--size-max", assign_opt->config.size_max, "Largest long side");
    assign->add_option("--aspect-min", assign_opt->config.aspect_min, "Smallest aspect ratio");
    assign->add_option("--aspect-max", assign_opt->config.aspect_max, "Largest aspect ratio");
    assign->add_option("--grid", assign_opt->config.grid_per_axis, "Grid proposals per axis");
    assign->add_option("--jitter-copies", assign_opt->config.jitter_copies,
                       "Jittered copies per ground truth");
    assign->add_option("--jitter", assign_opt->config.jitter, "Relative jitter magnitude");
    assign->add_option("--seed", assign_opt->seed, "Random seed");
    assign->add_option("--strategy", assign_opt->strategy, "fixed|atss|patss|iou-fixed")
        ->check(CLI::IsMember({"fixed", "atss", "patss", "iou-fixed"}));
    assign->add_option("--metric", assign_opt->metric, "kld|bd|wd")
        ->check(CLI::IsMember({"kld", "bd", "wd"}));
    assign->add_option("--pos-thr", assign_opt->pos_thr, "Positive threshold (fixed)");
    assign->add_option("--neg-thr", assign_opt->neg_thr, "Negative threshold (fixed)");
    assign->add_flag("--force-match,!--no-force-match", assign_opt->force_match,
                     "Promote each gt's best proposal (fixed)");
    assign->add_option("--candidates", assign_opt->candidates, "Candidate pool size (dynamic)");
    assign->add_option("--output", assign_opt->output, "Write report here instead of stdout");
    assign->add_option("--csv", assign_opt->csv, "Write per-proposal CSV here");
    assign->add_option("--svg", assign_opt->svg, "Write scene overlay SVG here");
    assign->add_option("--format", assign_opt->format, "Primary output format")
        ->check(CLI::IsMember({"json", "csv", "svg"}));
    assign->callback(
        [assign_opt, &action] { action = [assign_opt] { return run_assign(*assign_opt); }; });

    auto optimize_opt = std::make_shared<OptimizeOptions>();
    CLI::App* optimize = app.add_subcommand("optimize", "Gradient-descent point-set fitting");
    optimize->add_option("--gt", optimize_opt->gt, "Ground-truth box (file, '-', or inline JSON)")
        ->required();
    optimize->add_option("--loss", optimize_opt->loss_name, "lkld|lbd|lwd")
        ->check(CLI::IsMember({"lkld", "lbd", "lwd"}));
    optimize->add_option("--points", optimize_opt->points, "Point count")
        ->check(CLI::Range(3, 1000));
    optimize->add_option("--init-jitter", optimize_opt->init_jitter,
                         "Relative jitter of the initial points");
    optimize->add_option("--steps", optimize_opt->steps, "Gradient steps")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--step-size", optimize_opt->step_size,
                         "Step size (default: per-loss calibrated)");
    optimize->add_option("--seed", optimize_opt->seed, "Random seed");
    optimize->add_option("--output", optimize_opt->output, "Write report here instead of stdout");
    optimize->add_option("--csv", optimize_opt->csv, "Write the step trace CSV here");
    optimize->add_option("--svg", optimize_opt->svg, "Write the overlay SVG here");
    optimize->callback([optimize_opt, &action] {
        action = [optimize_opt] { return run_optimize(*optimize_opt); };
    });

    auto ingest_opt = std::make_shared<IngestOptions>();
    CLI::App* ingest = app.add_subcommand("ingest", "Parse annotation files and summarize");
    ingest->add_option("--dir", ingest_opt->dir, "Directory of annotation .txt files")->required();
    ingest->add_option("--output", ingest_opt->output, "Write summary here instead of stdout");
    ingest->add_option("--csv", ingest_opt->csv, "Write summary CSV here");
    ingest->add_option("--format", ingest_opt->format, "Primary output format")
        ->check(CLI::IsMember({"json", "csv"}));
    ingest->callback(
        [ingest_opt, &action] { action = [ingest_opt] { return run_ingest(*ingest_opt); }; });

    auto sweep_opt = std::make_shared<SweepOptions>();
    CLI::App* sweep = app.add_subcommand("sweep", "Loss continuity across the angle boundary");
    sweep->add_option("--gt", sweep_opt->gt, "Template box (file, '-', or inline JSON)")
        ->required();
    sweep->add_option("--loss", sweep_opt->loss_name, "lkld|lbd|lwd")
        ->check(CLI::IsMember({"lkld", "lbd", "lwd"}));
    sweep->add_option("--resolution", sweep_opt->resolution, "Samples across [-pi, pi)");
    sweep->add_option("--output", sweep_opt->output, "Write summary here instead of stdout");
    sweep->add_option("--csv", sweep_opt->csv, "Write the curve CSV here");
    sweep->callback([sweep_opt, &action] { action = [sweep_opt] { return run_sweep(*sweep_opt); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return action();
    } catch (const DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Json::parse_error& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    }
}
