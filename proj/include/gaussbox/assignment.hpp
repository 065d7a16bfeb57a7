#pragma once
/**
 * @file assignment.hpp
 * @brief Normalized similarity scores and fixed / ATSS-style / GMM-based
 *        positive-negative sample selection.
 */

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gaussbox/metrics.hpp"

namespace gaussbox {

/// Score normalization of a raw distance:
///   Kld: 1/(2 + d)    max 1/2 at d = 0
///   Bd:  1/(1 + d^2)  max 1 at d = 0
///   Wd:  1/(2 + d)    max 1/2 at d = 0
/// Strictly decreasing in d.
double score_from_distance(MetricKind metric, double distance);

/// Similarity of ground truth g and proposal p in (0, 1].
double score(MetricKind metric, const Gaussian2& g, const Gaussian2& p);

/// What a score matrix was built from: one of the Gaussian metrics, or the
/// rotated-IoU baseline used for comparison experiments.
enum class ScoreKind { Kld, Bd, Wd, IouBaseline };

ScoreKind score_kind_of(MetricKind metric);
const char* to_string(ScoreKind kind);

/// Ground truths along rows, proposals along columns, with the raw distances
/// retained next to the normalized scores.
struct ScoreMatrix {
    ScoreKind kind = ScoreKind::Kld;
    std::size_t num_gts = 0;
    std::size_t num_proposals = 0;
    std::vector<double> scores;     // row-major
    std::vector<double> distances;  // row-major

    double score_at(std::size_t gt, std::size_t proposal) const {
        return scores[gt * num_proposals + proposal];
    }
    double distance_at(std::size_t gt, std::size_t proposal) const {
        return distances[gt * num_proposals + proposal];
    }
};

ScoreMatrix build_score_matrix(MetricKind metric, std::span<const Gaussian2> gts,
                               std::span<const Gaussian2> proposals);

/// Baseline matrix: score = rotated IoU between each ground-truth box and the
/// box decoded from each proposal Gaussian; distance column stores 1 - IoU.
/// Unlike the Gaussian scores, entries may be exactly zero.
ScoreMatrix build_iou_score_matrix(std::span<const Obb> gts,
                                   std::span<const Gaussian2> proposals);

enum class SampleLabel { Positive, Negative, Ignore };

const char* to_string(SampleLabel label);

struct ProposalAssignment {
    SampleLabel label = SampleLabel::Negative;
    int gt = -1;           // matched ground truth for positives, else -1
    double score = 0.0;    // score against the matched gt, or the best gt
    double distance = 0.0;
};

struct AssignmentResult {
    std::vector<ProposalAssignment> proposals;
    std::vector<int> positives_per_gt;
};

/// Threshold assignment: a proposal is positive when its best score reaches
/// pos_thr, negative when below neg_thr, otherwise ignored. With force_match,
/// each ground truth's best proposal is promoted to positive; a proposal
/// promoted by several ground truths goes to the higher-scoring one.
AssignmentResult assign_fixed(const ScoreMatrix& scores, double pos_thr, double neg_thr,
                              bool force_match = true);

/// Mean plus population standard deviation (divisor J) of the values.
double atss_threshold(std::span<const double> values);

/// Dynamic assignment: per ground truth, pool the top candidates_per_gt
/// proposals by score, set the threshold to atss_threshold(pool), select pool
/// members at or above it (at least the best one). Conflicts go to the
/// higher-scoring ground truth; everything unselected is negative.
AssignmentResult assign_atss(const ScoreMatrix& scores, int candidates_per_gt = 9);

struct GmmComponent {
    double weight = 0.5;
    double mean = 0.0;
    double variance = 0.0;
};

/// Two-component fit, ordered by ascending mean. `degenerate` is set when the
/// variance floor engaged or the components collapsed onto each other;
/// `log_likelihoods` records the objective after each E step.
struct GmmParams {
    std::array<GmmComponent, 2> components{};
    bool degenerate = false;
    std::vector<double> log_likelihoods;
};

inline constexpr double kGmmVarianceFloor = 1e-8;

/// Expectation-maximization for a 1-D two-component mixture. Initialization
/// is deterministic (means at the 25th/75th percentiles, equal weights,
/// variances at half the sample variance); the seed is part of the interface
/// for reproducibility bookkeeping. Stops after `iters` rounds or when the
/// log-likelihood gain drops below `tol`.
GmmParams gmm_em_1d(std::span<const double> values, int iters, double tol, std::uint64_t seed);

/// Probabilistic dynamic assignment: per ground truth, fit a two-component
/// mixture to the candidate pool scores and select candidates whose posterior
/// under the higher-mean component exceeds 1/2. Falls back to the ATSS rule
/// for a ground truth whose pool is too small or whose fit degenerates.
AssignmentResult assign_patss(const ScoreMatrix& scores, int candidates_per_gt = 9,
                              std::uint64_t seed = 0);

}  // namespace gaussbox
