#include "gaussbox/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "gaussbox/random.hpp"

namespace gaussbox {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

void validate_config(const SceneConfig& c) {
    const bool ranges_ok = c.size_min > 0.0 && c.size_max >= c.size_min &&
                           c.aspect_min >= 1.0 && c.aspect_max >= c.aspect_min &&
                           c.aspect_max <= 20.0;
    if (c.num_gts < 1 || c.extent <= 0.0 || !ranges_ok || c.grid_per_axis < 1 ||
        c.jitter_copies < 0 || c.jitter < 0.0) {
        throw InvalidInputError("scene config has empty or invalid ranges");
    }
    if (c.size_max >= c.extent) {
        throw InvalidInputError("boxes of size_max do not fit in the field extent");
    }
}

double smooth_l1(double x) {
    const double a = std::abs(x);
    return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

}  // namespace

Scene gen_scene(const SceneConfig& config, std::uint64_t seed) {
    validate_config(config);
    std::mt19937_64 rng(seed);
    Scene scene;
    scene.config = config;
    scene.seed = seed;

    scene.gts.reserve(static_cast<std::size_t>(config.num_gts));
    for (int i = 0; i < config.num_gts; ++i) {
        const double long_side = uniform(rng, config.size_min, config.size_max);
        const double aspect = uniform(rng, config.aspect_min, config.aspect_max);
        const double short_side = long_side / aspect;
        const double margin = long_side / 2.0;
        Obb box;
        box.cx = uniform(rng, margin, config.extent - margin);
        box.cy = uniform(rng, margin, config.extent - margin);
        box.w = long_side;
        box.h = short_side;
        box.theta = uniform(rng, -kHalfPi, kHalfPi);
        std::string category = aspect < 1.5 ? "compact" : (aspect < 3.0 ? "medium" : "elongated");
        scene.gts.push_back({box, std::move(category)});
    }

    std::vector<double> sizes;
    sizes.reserve(scene.gts.size());
    for (const GroundTruth& gt : scene.gts) sizes.push_back(std::sqrt(gt.box.w * gt.box.h));
    const double grid_size = median_of(sizes);
    const double grid_var = (grid_size / 2.0) * (grid_size / 2.0);

    for (int gy = 0; gy < config.grid_per_axis; ++gy) {
        for (int gx = 0; gx < config.grid_per_axis; ++gx) {
            Gaussian2 g;
            g.mu = {(gx + 0.5) * config.extent / config.grid_per_axis,
                    (gy + 0.5) * config.extent / config.grid_per_axis};
            g.sigma = grid_var * Mat2::Identity();
            scene.proposals.push_back({g, ProposalSource::Grid, -1});
        }
    }

    for (std::size_t i = 0; i < scene.gts.size(); ++i) {
        for (int c = 0; c < config.jitter_copies; ++c) {
            const Obb& base = scene.gts[i].box;
            Obb jittered = base;
            jittered.cx += uniform(rng, -config.jitter, config.jitter) * base.w;
            jittered.cy += uniform(rng, -config.jitter, config.jitter) * base.h;
            jittered.w *= 1.0 + uniform(rng, -config.jitter, config.jitter);
            jittered.h *= 1.0 + uniform(rng, -config.jitter, config.jitter);
            jittered.theta += uniform(rng, -config.jitter, config.jitter) * (kPi / 4.0);
            scene.proposals.push_back({obb_to_gaussian(canonicalize_obb(jittered)),
                                       ProposalSource::JitteredGt, static_cast<int>(i)});
        }
    }
    return scene;
}

namespace {

/// Local-frame template: box corners for k = 4; corners, edge midpoints and
/// center for k = 9; otherwise evenly spaced along the perimeter.
std::vector<Vec2> local_template(const Obb& box, int k) {
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(k));
    const double hw = box.w / 2.0;
    const double hh = box.h / 2.0;
    if (k == 4) {
        pts = {{hw, hh}, {-hw, hh}, {-hw, -hh}, {hw, -hh}};
        return pts;
    }
    if (k == 9) {
        pts = {{hw, hh},  {0, hh},  {-hw, hh}, {-hw, 0}, {-hw, -hh},
               {0, -hh},  {hw, -hh}, {hw, 0},  {0, 0}};
        return pts;
    }
    const double perimeter = 2.0 * (box.w + box.h);
    for (int i = 0; i < k; ++i) {
        double t = perimeter * i / k;
        if (t < box.w) {
            pts.push_back({-hw + t, -hh});
        } else if ((t -= box.w) < box.h) {
            pts.push_back({hw, -hh + t});
        } else if ((t -= box.h) < box.w) {
            pts.push_back({hw - t, hh});
        } else {
            t -= box.w;
            pts.push_back({-hw, hh - t});
        }
    }
    return pts;
}

}  // namespace

PointSetRep matched_point_set(const Obb& box, int k) {
    validate_obb(box);
    if (k < 3) throw InvalidInputError("matched point set needs k >= 3");
    std::vector<Vec2> local = local_template(box, k);

    // Whiten the template so its fitted Gaussian equals the box's Gaussian
    // exactly: a zero-jitter initialization sits at the loss optimum.
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : local) mean += p;
    mean /= static_cast<double>(local.size());
    Mat2 cov = Mat2::Zero();
    for (const Vec2& p : local) cov += (p - mean) * (p - mean).transpose();
    cov /= static_cast<double>(local.size());

    Mat2 target;
    target << box.w * box.w / 4.0, 0.0, 0.0, box.h * box.h / 4.0;
    const Mat2 root_cov = spd_sqrt(cov);
    const double det = root_cov(0, 0) * root_cov(1, 1) - root_cov(0, 1) * root_cov(1, 0);
    Mat2 inv_root;
    inv_root << root_cov(1, 1) / det, -root_cov(0, 1) / det,
                -root_cov(1, 0) / det, root_cov(0, 0) / det;
    const Mat2 shape = spd_sqrt(target) * inv_root;

    const double c = std::cos(box.theta);
    const double s = std::sin(box.theta);
    Mat2 rot;
    rot << c, -s, s, c;
    const Mat2 map = rot * shape;

    PointSetRep pts;
    pts.points.reserve(local.size());
    for (const Vec2& p : local) {
        pts.points.push_back(box.center() + map * (p - mean));
    }
    return pts;
}

PointSetRep jittered_point_set(const Obb& box, int k, double jitter, std::uint64_t seed) {
    PointSetRep pts = matched_point_set(box, k);
    std::mt19937_64 rng(seed);
    for (Vec2& p : pts.points) {
        p.x() += uniform(rng, -jitter, jitter) * box.w;
        p.y() += uniform(rng, -jitter, jitter) * box.h;
    }
    return pts;
}

double default_step_size(LossKind kind, const Obb& gt) {
    validate_obb(gt);
    // KLD and BD distances are scale-free, so their stable step grows with the
    // squared box diagonal; the WD distance already carries squared units and
    // takes an absolute step. Constants frozen from the convergence sweep.
    const double diag_sq = gt.w * gt.w + gt.h * gt.h;
    switch (kind) {
        case LossKind::Kld: return 0.005 * diag_sq;
        case LossKind::Bd: return 0.05 * diag_sq;
        case LossKind::Wd: return 1.0;
    }
    throw InvalidInputError("unknown loss kind");
}

OptimizationTrace optimize_pointset(const Obb& gt, const PointSetRep& init, LossKind kind,
                                    double step_size, int steps) {
    if (steps < 1) throw InvalidInputError("optimization needs at least one step");
    if (!(step_size > 0.0)) throw InvalidInputError("step size must be positive");
    const Gaussian2 gt_gauss = obb_to_gaussian(gt);
    const MetricKind metric = paired_metric(kind);

    OptimizationTrace trace;
    PointSetRep pts = init;

    const auto evaluate = [&](int step_index) -> bool {
        Gaussian2 fit;
        double d = 0.0, l = 0.0;
        try {
            fit = fit_gaussian_mle(pts);
            d = metric_distance(metric, gt_gauss, fit);
            l = loss_from_distance(kind, d);
        } catch (const InvalidInputError& e) {
            trace.diverged = true;
            trace.diagnostic = "step " + std::to_string(step_index) + ": " + e.what();
            return false;
        }
        bool finite = std::isfinite(d) && std::isfinite(l);
        for (const Vec2& p : pts.points) finite = finite && p.allFinite();
        if (!finite) {
            trace.diverged = true;
            trace.diagnostic =
                "step " + std::to_string(step_index) + ": loss or points became non-finite";
            return false;
        }
        trace.steps.push_back({step_index, l, d, pts});
        return true;
    };

    if (!evaluate(0)) {
        throw InvalidInputError("initial point set is unusable: " + trace.diagnostic);
    }
    const double d0 = trace.steps.front().distance;

    for (int t = 1; t <= steps; ++t) {
        LossGradient grad;
        try {
            grad = loss_grad_points(kind, gt_gauss, pts);
        } catch (const InvalidInputError& e) {
            trace.diverged = true;
            trace.diagnostic = "step " + std::to_string(t) + ": " + e.what();
            break;
        }
        for (std::size_t i = 0; i < pts.points.size(); ++i) {
            pts.points[i] -= step_size * grad.d_points[i];
        }
        if (!evaluate(t)) break;
        if (trace.steps.back().distance > kDivergenceDistanceFactor * (d0 + 1.0)) {
            trace.diverged = true;
            trace.diagnostic = "step " + std::to_string(t) + ": raw distance exceeded " +
                               std::to_string(kDivergenceDistanceFactor) + "x the initial value";
            break;
        }
    }

    trace.initial_distance = d0;
    trace.final_distance = trace.steps.back().distance;
    try {
        trace.terminal_obb = gaussian_to_obb(fit_gaussian_mle(trace.steps.back().points));
    } catch (const InvalidInputError&) {
        trace.terminal_obb = std::nullopt;
    }
    return trace;
}

Obb to_acute_angle_convention(const Obb& box) {
    validate_obb(box);
    Obb out = box;
    out.theta = fold_half_pi(out.theta);  // same box, theta in [-pi/2, pi/2)
    if (out.theta >= 0.0) {
        std::swap(out.w, out.h);
        out.theta -= kHalfPi;
    }
    return out;
}

double param_l1_loss(const Obb& gt_enc, const Obb& pred_enc) {
    const double diag = std::hypot(gt_enc.w, gt_enc.h);
    return smooth_l1((gt_enc.cx - pred_enc.cx) / diag) +
           smooth_l1((gt_enc.cy - pred_enc.cy) / diag) +
           smooth_l1(std::log(gt_enc.w / pred_enc.w)) +
           smooth_l1(std::log(gt_enc.h / pred_enc.h)) +
           smooth_l1(gt_enc.theta - pred_enc.theta);
}

SweepResult boundary_sweep(const Obb& gt_template, LossKind kind, int resolution) {
    validate_obb(gt_template);
    if (resolution < 100) throw InvalidInputError("sweep needs at least 100 samples");

    const PointSetRep pred_pts = matched_point_set(gt_template, 4);
    const Gaussian2 pred_gauss = fit_gaussian_mle(pred_pts);
    const Obb pred_enc = to_acute_angle_convention(gt_template);

    SweepResult res;
    res.samples.reserve(static_cast<std::size_t>(resolution));
    for (int k = 0; k < resolution; ++k) {
        const double theta = -kPi + 2.0 * kPi * k / resolution;
        Obb phys = gt_template;
        phys.theta = theta;
        const Obb enc = to_acute_angle_convention(phys);
        SweepSample sample;
        sample.theta = theta;
        sample.gaussian_loss = loss(kind, obb_to_gaussian(enc), pred_gauss);
        sample.param_loss = param_l1_loss(enc, pred_enc);
        res.samples.push_back(sample);
    }

    std::vector<double> gauss_deltas, param_deltas;
    gauss_deltas.reserve(res.samples.size());
    param_deltas.reserve(res.samples.size());
    for (std::size_t k = 0; k + 1 < res.samples.size(); ++k) {
        const double gd = std::abs(res.samples[k + 1].gaussian_loss - res.samples[k].gaussian_loss);
        const double pd = std::abs(res.samples[k + 1].param_loss - res.samples[k].param_loss);
        gauss_deltas.push_back(gd);
        param_deltas.push_back(pd);
        if (gd > res.gaussian_max_jump) res.gaussian_max_jump = gd;
        if (pd > res.param_max_jump) {
            res.param_max_jump = pd;
            res.param_max_jump_theta = res.samples[k].theta;
        }
    }
    res.gaussian_median_delta = median_of(gauss_deltas);
    res.param_median_delta = median_of(param_deltas);
    return res;
}

const char* to_string(StrategySpec::Kind kind) {
    switch (kind) {
        case StrategySpec::Kind::Fixed: return "fixed";
        case StrategySpec::Kind::Atss: return "atss";
        case StrategySpec::Kind::Patss: return "patss";
        case StrategySpec::Kind::IouFixed: return "iou-fixed";
    }
    return "?";
}

StrategySpec::Kind strategy_kind_from_string(const std::string& name) {
    if (name == "fixed") return StrategySpec::Kind::Fixed;
    if (name == "atss") return StrategySpec::Kind::Atss;
    if (name == "patss") return StrategySpec::Kind::Patss;
    if (name == "iou-fixed") return StrategySpec::Kind::IouFixed;
    throw InvalidInputError("unknown strategy '" + name +
                            "' (expected fixed|atss|patss|iou-fixed)");
}

ExperimentResult run_assignment_experiment(const Scene& scene, const StrategySpec& strategy) {
    const auto start = std::chrono::steady_clock::now();

    std::vector<Gaussian2> gt_gaussians;
    std::vector<Obb> gt_boxes;
    gt_gaussians.reserve(scene.gts.size());
    gt_boxes.reserve(scene.gts.size());
    for (const GroundTruth& gt : scene.gts) {
        gt_boxes.push_back(gt.box);
        gt_gaussians.push_back(obb_to_gaussian(gt.box));
    }
    std::vector<Gaussian2> proposal_gaussians;
    proposal_gaussians.reserve(scene.proposals.size());
    for (const Proposal& p : scene.proposals) proposal_gaussians.push_back(p.gaussian);

    ExperimentResult out;
    if (strategy.kind == StrategySpec::Kind::IouFixed) {
        out.matrix = build_iou_score_matrix(gt_boxes, proposal_gaussians);
    } else {
        out.matrix = build_score_matrix(strategy.metric, gt_gaussians, proposal_gaussians);
    }

    switch (strategy.kind) {
        case StrategySpec::Kind::Fixed:
        case StrategySpec::Kind::IouFixed:
            out.assignment = assign_fixed(out.matrix, strategy.pos_thr, strategy.neg_thr,
                                          strategy.force_match);
            break;
        case StrategySpec::Kind::Atss:
            out.assignment = assign_atss(out.matrix, strategy.candidates_per_gt);
            break;
        case StrategySpec::Kind::Patss:
            out.assignment = assign_patss(out.matrix, strategy.candidates_per_gt, strategy.seed);
            break;
    }

    ExperimentReport& report = out.report;
    report.strategy = strategy;
    report.score_kind = out.matrix.kind;
    report.positives_per_gt = out.assignment.positives_per_gt;

    double score_sum = 0.0;
    for (const ProposalAssignment& pa : out.assignment.proposals) {
        switch (pa.label) {
            case SampleLabel::Positive:
                ++report.num_positive;
                score_sum += pa.score;
                break;
            case SampleLabel::Negative: ++report.num_negative; break;
            case SampleLabel::Ignore: ++report.num_ignore; break;
        }
    }
    report.mean_positive_score =
        report.num_positive > 0 ? score_sum / static_cast<double>(report.num_positive) : 0.0;

    std::size_t jittered = 0, recovered = 0;
    for (std::size_t j = 0; j < scene.proposals.size(); ++j) {
        if (scene.proposals[j].source != ProposalSource::JitteredGt) continue;
        ++jittered;
        const ProposalAssignment& pa = out.assignment.proposals[j];
        if (pa.label == SampleLabel::Positive && pa.gt == scene.proposals[j].source_gt) {
            ++recovered;
        }
    }
    if (jittered > 0) {
        report.recovery_rate = static_cast<double>(recovered) / static_cast<double>(jittered);
    }

    report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
}

std::vector<CategoryAspectStat> aspect_ratio_stats(std::span<const GroundTruth> gts) {
    std::map<std::string, std::pair<std::size_t, double>> acc;
    for (const GroundTruth& gt : gts) {
        validate_obb(gt.box);
        auto& [count, sum] = acc[gt.category];
        ++count;
        sum += gt.box.aspect_ratio();
    }
    std::vector<CategoryAspectStat> stats;
    stats.reserve(acc.size());
    for (const auto& [category, entry] : acc) {
        stats.push_back({category, entry.first, entry.second / static_cast<double>(entry.first)});
    }
    return stats;
}

}  // namespace gaussbox
