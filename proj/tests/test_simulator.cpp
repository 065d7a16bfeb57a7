#include "gaussbox/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

namespace gaussbox {
namespace {

constexpr double kPi = std::numbers::pi;

SceneConfig small_config() {
    SceneConfig cfg;
    cfg.num_gts = 4;
    cfg.extent = 100.0;
    cfg.size_min = 8.0;
    cfg.size_max = 20.0;
    cfg.aspect_min = 1.0;
    cfg.aspect_max = 4.0;
    cfg.grid_per_axis = 8;
    cfg.jitter_copies = 3;
    cfg.jitter = 0.15;
    return cfg;
}

TEST(GenScene, DeterministicAndCorrectlySized) {
    const SceneConfig cfg = small_config();
    const Scene a = gen_scene(cfg, 77);
    const Scene b = gen_scene(cfg, 77);
    ASSERT_EQ(a.gts.size(), static_cast<std::size_t>(cfg.num_gts));
    ASSERT_EQ(a.proposals.size(),
              static_cast<std::size_t>(cfg.grid_per_axis * cfg.grid_per_axis +
                                       cfg.num_gts * cfg.jitter_copies));
    for (std::size_t i = 0; i < a.gts.size(); ++i) {
        EXPECT_EQ(a.gts[i].box.cx, b.gts[i].box.cx);
        EXPECT_EQ(a.gts[i].box.theta, b.gts[i].box.theta);
        EXPECT_EQ(a.gts[i].category, b.gts[i].category);
    }
    for (std::size_t j = 0; j < a.proposals.size(); ++j) {
        EXPECT_EQ(a.proposals[j].gaussian.mu, b.proposals[j].gaussian.mu);
        EXPECT_EQ(a.proposals[j].gaussian.sigma, b.proposals[j].gaussian.sigma);
        EXPECT_EQ(a.proposals[j].source_gt, b.proposals[j].source_gt);
    }
}

TEST(GenScene, ZeroJitterCopiesAreExact) {
    SceneConfig cfg = small_config();
    cfg.num_gts = 1;
    cfg.jitter = 0.0;
    cfg.jitter_copies = 1;
    const Scene scene = gen_scene(cfg, 5);
    const Gaussian2 expected = obb_to_gaussian(scene.gts[0].box);
    bool found_exact_copy = false;
    for (const Proposal& p : scene.proposals) {
        if (p.source != ProposalSource::JitteredGt) continue;
        found_exact_copy = p.gaussian.mu == expected.mu && p.gaussian.sigma == expected.sigma;
    }
    EXPECT_TRUE(found_exact_copy);
}

TEST(GenScene, AspectRatiosStayInConfiguredRange) {
    SceneConfig cfg = small_config();
    cfg.num_gts = 100;
    cfg.aspect_min = 2.0;
    cfg.aspect_max = 4.0;
    cfg.size_max = 16.0;
    const Scene scene = gen_scene(cfg, 13);
    const auto stats = aspect_ratio_stats(scene.gts);
    std::size_t total = 0;
    for (const auto& s : stats) {
        EXPECT_GE(s.mean_aspect_ratio, 2.0);
        EXPECT_LE(s.mean_aspect_ratio, 4.0);
        total += s.count;
    }
    EXPECT_EQ(total, 100u);
    for (const GroundTruth& gt : scene.gts) {
        EXPECT_GE(gt.box.aspect_ratio(), 2.0 - 1e-12);
        EXPECT_LE(gt.box.aspect_ratio(), 4.0 + 1e-12);
    }
}

TEST(GenScene, RejectsInvalidConfigs) {
    SceneConfig bad = small_config();
    bad.size_min = -1.0;
    EXPECT_THROW(gen_scene(bad, 1), InvalidInputError);
    bad = small_config();
    bad.aspect_max = 25.0;
    EXPECT_THROW(gen_scene(bad, 1), InvalidInputError);
    bad = small_config();
    bad.num_gts = 0;
    EXPECT_THROW(gen_scene(bad, 1), InvalidInputError);
}

TEST(MatchedPointSet, FitsTheBoxGaussianExactly) {
    const Obb box{1, 2, 4, 2, 0.3};
    const Gaussian2 expected = obb_to_gaussian(box);
    for (int k : {3, 4, 5, 9, 12}) {
        const PointSetRep pts = matched_point_set(box, k);
        EXPECT_EQ(pts.size(), static_cast<std::size_t>(k));
        const Gaussian2 fit = fit_gaussian_mle(pts);
        EXPECT_NEAR(fit.mu.x(), expected.mu.x(), 1e-12) << "k=" << k;
        EXPECT_NEAR(fit.mu.y(), expected.mu.y(), 1e-12) << "k=" << k;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                EXPECT_NEAR(fit.sigma(r, c), expected.sigma(r, c), 1e-12) << "k=" << k;
            }
        }
        // The whitened layout stays within an expanded copy of the box.
        for (const Vec2& p : pts.points) {
            EXPECT_TRUE(point_in_obb({box.cx, box.cy, box.w * 1.5, box.h * 1.5, box.theta}, p));
        }
    }
    EXPECT_THROW(matched_point_set(box, 2), InvalidInputError);
}

TEST(OptimizePointset, StaysAtTheOptimumWhenStartedThere) {
    const Obb gt{2, -1, 6, 3, 0.4};
    const PointSetRep init = matched_point_set(gt, 4);
    // Corner points reproduce the box Gaussian exactly, so the distance stays
    // at the floor for every step.
    for (const LossKind kind : {LossKind::Kld, LossKind::Bd, LossKind::Wd}) {
        const OptimizationTrace trace =
            optimize_pointset(gt, init, kind, default_step_size(kind, gt), 50);
        EXPECT_FALSE(trace.diverged);
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            EXPECT_EQ(trace.steps[i].step, static_cast<int>(i));  // contiguous from 0
            EXPECT_LT(trace.steps[i].distance, 1e-6) << to_string(kind) << " step " << i;
        }
        EXPECT_TRUE(trace.converged());
    }
}

TEST(OptimizePointset, ConvergesFromJitteredInits) {
    std::mt19937_64 rng(303);
    for (const LossKind kind : {LossKind::Kld, LossKind::Bd, LossKind::Wd}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Obb gt = oracles::random_canonical_obb(rng, 1.0, 4.0);
            const PointSetRep init = jittered_point_set(gt, 9, 0.2, rng());
            const OptimizationTrace trace = optimize_pointset(
                gt, init, kind, default_step_size(kind, gt), kDefaultOptimizeSteps);
            EXPECT_FALSE(trace.diverged) << to_string(kind) << " trial " << trial;
            EXPECT_TRUE(trace.converged())
                << to_string(kind) << " trial " << trial << ": initial "
                << trace.initial_distance << " final " << trace.final_distance;
            ASSERT_TRUE(trace.terminal_obb.has_value());
            EXPECT_GT(rotated_iou(gt, *trace.terminal_obb), 0.9)
                << to_string(kind) << " trial " << trial;
        }
    }
}

TEST(OptimizePointset, RecoversFromPureTranslation) {
    // Corners shifted by 20% of the width: the tuned default step brings the
    // raw distance under 1% of its initial value and the decoded box overlaps
    // the ground truth almost perfectly.
    const Obb gt{1.0, -2.0, 5.0, 2.0, 0.6};
    PointSetRep init = matched_point_set(gt, 4);
    for (Vec2& p : init.points) p.x() += 0.2 * gt.w;
    const OptimizationTrace trace = optimize_pointset(
        gt, init, LossKind::Wd, default_step_size(LossKind::Wd, gt), kDefaultOptimizeSteps);
    EXPECT_FALSE(trace.diverged);
    EXPECT_LT(trace.final_distance, 0.01 * trace.initial_distance);
    ASSERT_TRUE(trace.terminal_obb.has_value());
    EXPECT_GT(rotated_iou(gt, *trace.terminal_obb), 0.9);
}

TEST(OptimizePointset, DetectsDivergenceAtAbsurdStepSizes) {
    const Obb gt{0, 0, 8, 4, 0.5};
    const PointSetRep init = jittered_point_set(gt, 9, 0.2, 7);
    const OptimizationTrace trace = optimize_pointset(gt, init, LossKind::Wd, 1e6, 100);
    EXPECT_TRUE(trace.diverged);
    EXPECT_FALSE(trace.diagnostic.empty());
    EXPECT_FALSE(trace.converged());
    for (const TraceStep& s : trace.steps) {
        EXPECT_TRUE(std::isfinite(s.loss));
        EXPECT_TRUE(std::isfinite(s.distance));
    }
}

TEST(OptimizePointset, ValidatesArguments) {
    const Obb gt{0, 0, 4, 2, 0};
    const PointSetRep init = matched_point_set(gt, 4);
    EXPECT_THROW(optimize_pointset(gt, init, LossKind::Bd, 0.0, 10), InvalidInputError);
    EXPECT_THROW(optimize_pointset(gt, init, LossKind::Bd, 1.0, 0), InvalidInputError);
}

TEST(BoundarySweep, GaussianLossIsContinuousWhereParamLossJumps) {
    const Obb gt{0, 0, 4, 2, 0.0};
    const SweepResult sweep = boundary_sweep(gt, LossKind::Kld, 2000);
    ASSERT_EQ(sweep.samples.size(), 2000u);
    EXPECT_LT(sweep.gaussian_max_jump, 10.0 * sweep.gaussian_median_delta);
    EXPECT_GT(sweep.param_max_jump, 50.0 * sweep.param_median_delta);
}

TEST(BoundarySweep, ParamJumpSitsAtTheAngleBoundary) {
    const Obb gt{0, 0, 4, 2, 0.0};
    const int resolution = 2000;
    const SweepResult sweep = boundary_sweep(gt, LossKind::Wd, resolution);
    // Jump of the encoded-parameter loss in the grid interval straddling the
    // -pi/2 boundary exceeds 50x the median adjacent delta.
    double jump_at_boundary = 0.0;
    for (std::size_t k = 0; k + 1 < sweep.samples.size(); ++k) {
        if (sweep.samples[k].theta < -kPi / 2 && sweep.samples[k + 1].theta >= -kPi / 2) {
            jump_at_boundary =
                std::abs(sweep.samples[k + 1].param_loss - sweep.samples[k].param_loss);
        }
    }
    EXPECT_GT(jump_at_boundary, 50.0 * sweep.param_median_delta);
}

TEST(BoundarySweep, SquareTemplateGivesConstantGaussianLoss) {
    const Obb square{0, 0, 3, 3, 0.0};
    const SweepResult sweep = boundary_sweep(square, LossKind::Kld, 500);
    double lo = sweep.samples.front().gaussian_loss;
    double hi = lo;
    for (const SweepSample& s : sweep.samples) {
        lo = std::min(lo, s.gaussian_loss);
        hi = std::max(hi, s.gaussian_loss);
    }
    EXPECT_LT(hi - lo, 1e-9);
}

TEST(BoundarySweep, RejectsCoarseGrids) {
    EXPECT_THROW(boundary_sweep({0, 0, 4, 2, 0}, LossKind::Kld, 50), InvalidInputError);
}

TEST(IsolatedPointRobustness, OneOutlierCostsLessThanUniformShrink) {
    // One of nine on-box points thrown outward along the box's long axis by
    // twice the diagonal moves the Gaussian loss less than shrinking every
    // point toward the centroid by 30%; a corner-matching L1 comparison ranks
    // the two the other way around.
    const auto on_box_points = [](const Obb& box) {
        const Qbb q = obb_to_qbb(box);
        PointSetRep pts;
        for (int i = 0; i < 4; ++i) {
            pts.points.push_back(q.corners[static_cast<std::size_t>(i)]);
            pts.points.push_back(0.5 * (q.corners[static_cast<std::size_t>(i)] +
                                        q.corners[static_cast<std::size_t>((i + 1) % 4)]));
        }
        pts.points.push_back(box.center());
        return pts;
    };

    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const Obb gt = oracles::random_canonical_obb(rng, 3.0, 6.0);
        const Gaussian2 gt_gauss = obb_to_gaussian(gt);
        const PointSetRep matched = on_box_points(gt);

        PointSetRep outlier = matched;
        const double diag = std::hypot(gt.w, gt.h);
        const Vec2 long_axis{std::cos(gt.theta), std::sin(gt.theta)};
        outlier.points[7] += 2.0 * diag * long_axis;  // midpoint of a short edge

        PointSetRep shrunk = matched;
        const Vec2 centroid = fit_gaussian_mle(matched).mu;
        for (Vec2& p : shrunk.points) p = centroid + 0.7 * (p - centroid);

        const double d_outlier = kld(gt_gauss, fit_gaussian_mle(outlier));
        const double d_shrunk = kld(gt_gauss, fit_gaussian_mle(shrunk));
        EXPECT_LT(d_outlier, d_shrunk) << "trial " << trial;

        double l1_outlier = 0.0, l1_shrunk = 0.0;
        for (std::size_t i = 0; i < matched.points.size(); ++i) {
            l1_outlier += (outlier.points[i] - matched.points[i]).lpNorm<1>();
            l1_shrunk += (shrunk.points[i] - matched.points[i]).lpNorm<1>();
        }
        EXPECT_GT(l1_outlier, l1_shrunk) << "trial " << trial;
    }
}

TEST(RunAssignmentExperiment, ZeroJitterRecoveryIsPerfect) {
    SceneConfig cfg = small_config();
    cfg.jitter = 0.0;
    const Scene scene = gen_scene(cfg, 21);
    for (const auto kind : {StrategySpec::Kind::Atss, StrategySpec::Kind::Patss}) {
        StrategySpec strategy;
        strategy.kind = kind;
        strategy.metric = MetricKind::Kld;
        const ExperimentResult res = run_assignment_experiment(scene, strategy);
        ASSERT_TRUE(res.report.recovery_rate.has_value());
        EXPECT_EQ(*res.report.recovery_rate, 1.0) << to_string(kind);
    }
}

TEST(RunAssignmentExperiment, ThresholdAboveScoreCeilingYieldsNoPositives) {
    const Scene scene = gen_scene(small_config(), 22);
    StrategySpec strategy;
    strategy.kind = StrategySpec::Kind::Fixed;
    strategy.metric = MetricKind::Kld;
    strategy.pos_thr = 0.6;  // above the 0.5 ceiling of the KLD score
    strategy.neg_thr = 0.3;
    strategy.force_match = false;
    const ExperimentResult res = run_assignment_experiment(scene, strategy);
    EXPECT_EQ(res.report.num_positive, 0u);
}

TEST(RunAssignmentExperiment, AtssRecoversAtLeastAsWellAsFixedOnElongatedScenes) {
    int atss_not_worse = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SceneConfig cfg = small_config();
        cfg.aspect_min = 3.0;
        cfg.aspect_max = 8.0;
        cfg.jitter = 0.15;
        const Scene scene = gen_scene(cfg, 1000 + seed);

        StrategySpec fixed;
        fixed.kind = StrategySpec::Kind::Fixed;
        fixed.metric = MetricKind::Kld;
        fixed.pos_thr = 0.4;
        fixed.neg_thr = 0.3;
        StrategySpec atss;
        atss.kind = StrategySpec::Kind::Atss;
        atss.metric = MetricKind::Kld;

        const auto fixed_res = run_assignment_experiment(scene, fixed);
        const auto atss_res = run_assignment_experiment(scene, atss);
        ASSERT_TRUE(fixed_res.report.recovery_rate.has_value());
        ASSERT_TRUE(atss_res.report.recovery_rate.has_value());
        if (*atss_res.report.recovery_rate >= *fixed_res.report.recovery_rate) {
            ++atss_not_worse;
        }
    }
    EXPECT_GT(atss_not_worse, 10);
}

TEST(RunAssignmentExperiment, IouBaselineStrategyRuns) {
    const Scene scene = gen_scene(small_config(), 23);
    StrategySpec strategy;
    strategy.kind = StrategySpec::Kind::IouFixed;
    strategy.pos_thr = 0.5;
    strategy.neg_thr = 0.3;
    const ExperimentResult res = run_assignment_experiment(scene, strategy);
    EXPECT_EQ(res.report.score_kind, ScoreKind::IouBaseline);
    EXPECT_EQ(res.assignment.proposals.size(), scene.proposals.size());
    EXPECT_GT(res.report.num_positive, 0u);  // jittered copies overlap their source
}

TEST(AspectRatioStats, MeansPerCategory) {
    std::vector<GroundTruth> gts;
    gts.push_back({{0, 0, 3, 1, 0}, "ship"});
    auto stats = aspect_ratio_stats(gts);
    ASSERT_EQ(stats.size(), 1u);
    EXPECT_EQ(stats[0].mean_aspect_ratio, 3.0);

    gts.push_back({{5, 5, 4, 2, 0.3}, "ship"});      // ratio 2
    gts.push_back({{9, 9, 1, 4, 0}, "ship"});        // ratio 4 (short side first)
    gts.push_back({{1, 1, 5, 5, 0}, "plane"});       // ratio 1
    stats = aspect_ratio_stats(gts);
    ASSERT_EQ(stats.size(), 2u);
    EXPECT_EQ(stats[0].category, "plane");
    EXPECT_EQ(stats[0].count, 1u);
    EXPECT_EQ(stats[1].category, "ship");
    EXPECT_EQ(stats[1].count, 3u);
    EXPECT_NEAR(stats[1].mean_aspect_ratio, 3.0, 1e-12);
}

}  // namespace
}  // namespace gaussbox
