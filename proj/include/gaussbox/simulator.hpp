#pragma once
/**
 * @file simulator.hpp
 * @brief Synthetic scenes, gradient-descent point-set optimization, angle
 *        boundary sweeps, and assignment-strategy experiments.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaussbox/assignment.hpp"
#include "gaussbox/losses.hpp"

namespace gaussbox {

struct SceneConfig {
    int num_gts = 5;
    double extent = 100.0;      // boxes live in [0, extent]^2
    double size_min = 8.0;      // long-side range
    double size_max = 24.0;
    double aspect_min = 1.0;    // long/short ratio range, within [1, 20]
    double aspect_max = 4.0;
    int grid_per_axis = 16;     // grid proposals per axis
    int jitter_copies = 3;      // jittered copies of each ground truth
    double jitter = 0.2;        // relative jitter magnitude
};

enum class ProposalSource { Grid, JitteredGt };

struct Proposal {
    Gaussian2 gaussian;
    ProposalSource source = ProposalSource::Grid;
    int source_gt = -1;
};

struct GroundTruth {
    Obb box;
    std::string category;
};

struct Scene {
    SceneConfig config;
    std::uint64_t seed = 0;
    std::vector<GroundTruth> gts;
    std::vector<Proposal> proposals;
};

/// Deterministic synthetic scene: ground truths sampled uniformly within the
/// configured ranges (canonical by construction), proposals on a regular grid
/// of isotropic Gaussians sized by the median ground truth, plus jittered
/// copies of each ground truth. Bit-identical for equal (config, seed).
Scene gen_scene(const SceneConfig& config, std::uint64_t seed);

/// K points whose fitted Gaussian equals the box's Gaussian exactly, so a
/// zero-jitter initialization sits at the loss optimum. Layout: corners for
/// K = 4; corners, edge midpoints and center for K = 9; otherwise evenly
/// spaced along the perimeter; the template is then whitened to the box's
/// second moments (for K > 4 points extend slightly past the box edges).
PointSetRep matched_point_set(const Obb& box, int k);

/// Matched points with every coordinate displaced uniformly by up to
/// jitter * (w, h).
PointSetRep jittered_point_set(const Obb& box, int k, double jitter, std::uint64_t seed);

struct TraceStep {
    int step = 0;
    double loss = 0.0;
    double distance = 0.0;
    PointSetRep points;
};

struct OptimizationTrace {
    std::vector<TraceStep> steps;   // step 0 is the initial state
    bool diverged = false;
    std::string diagnostic;
    std::optional<Obb> terminal_obb;
    double initial_distance = 0.0;
    double final_distance = 0.0;

    /// Raw distance fell to 1% of its initial value (with a small absolute
    /// floor so starting at the optimum counts as converged).
    bool converged() const {
        return !diverged && final_distance <= 0.01 * initial_distance + 1e-9;
    }
};

/// A run is declared divergent when the loss or points stop being finite, the
/// fit degenerates, or the raw distance exceeds this factor of (initial + 1).
inline constexpr double kDivergenceDistanceFactor = 1e4;

inline constexpr int kDefaultOptimizeSteps = 800;

/// Fixed step size used when the caller does not supply one. Scaled by the
/// squared box diagonal so behaviour is comparable across box sizes; the
/// per-kind constants were tuned once on the convergence suite and frozen.
double default_step_size(LossKind kind, const Obb& gt);

/// Plain gradient descent on the point coordinates. Records loss, raw
/// distance and the points at every step; aborts with a diagnostic instead of
/// emitting non-finite values.
OptimizationTrace optimize_pointset(const Obb& gt, const PointSetRep& init, LossKind kind,
                                    double step_size, int steps);

struct SweepSample {
    double theta = 0.0;
    double gaussian_loss = 0.0;  // loss through the Gaussian pipeline
    double param_loss = 0.0;     // smooth-L1 on encoded box parameters
};

struct SweepResult {
    std::vector<SweepSample> samples;
    double gaussian_max_jump = 0.0;
    double gaussian_median_delta = 0.0;
    double param_max_jump = 0.0;
    double param_median_delta = 0.0;
    double param_max_jump_theta = 0.0;  // left sample of the largest jump
};

/// Re-encode a box with the acute-angle convention (theta in [-pi/2, 0), w/h
/// swapped at the boundaries). Continuous rotation of the underlying box
/// produces parameter jumps at multiples of pi/2.
Obb to_acute_angle_convention(const Obb& box);

/// Smooth-L1 on the encoded parameter deltas (centers normalized by the
/// ground-truth diagonal, log side ratios, raw angle difference).
double param_l1_loss(const Obb& gt_enc, const Obb& pred_enc);

/// Sweep theta over [-pi, pi) at `resolution` samples (>= 100): at each angle
/// the template box is re-encoded with the acute-angle convention and scored
/// against the template's own corner points, once through the Gaussian loss
/// and once through the parameter-space smooth-L1 baseline.
SweepResult boundary_sweep(const Obb& gt_template, LossKind kind, int resolution);

struct StrategySpec {
    enum class Kind { Fixed, Atss, Patss, IouFixed } kind = Kind::Atss;
    MetricKind metric = MetricKind::Kld;
    double pos_thr = 0.4;
    double neg_thr = 0.3;
    bool force_match = true;   // fixed strategies only
    int candidates_per_gt = 9;
    std::uint64_t seed = 0;
};

const char* to_string(StrategySpec::Kind kind);
StrategySpec::Kind strategy_kind_from_string(const std::string& name);

struct ExperimentReport {
    StrategySpec strategy;
    ScoreKind score_kind = ScoreKind::Kld;
    std::vector<int> positives_per_gt;
    std::size_t num_positive = 0;
    std::size_t num_negative = 0;
    std::size_t num_ignore = 0;
    double mean_positive_score = 0.0;
    /// Fraction of jittered ground-truth copies labeled positive for their
    /// source; absent when the scene has no jittered proposals.
    std::optional<double> recovery_rate;
    double runtime_ms = 0.0;
};

struct ExperimentResult {
    ExperimentReport report;
    AssignmentResult assignment;
    ScoreMatrix matrix;
};

ExperimentResult run_assignment_experiment(const Scene& scene, const StrategySpec& strategy);

struct CategoryAspectStat {
    std::string category;
    std::size_t count = 0;
    double mean_aspect_ratio = 0.0;
};

/// Mean long-side/short-side ratio per category, sorted by category name.
std::vector<CategoryAspectStat> aspect_ratio_stats(std::span<const GroundTruth> gts);

}  // namespace gaussbox
