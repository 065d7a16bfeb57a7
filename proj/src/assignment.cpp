#include "gaussbox/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gaussbox {

namespace {

/// Best ground truth for a proposal column: highest score, ties to the lower
/// index.
std::size_t best_gt_for(const ScoreMatrix& m, std::size_t j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.num_gts; ++i) {
        if (m.score_at(i, j) > m.score_at(best, j)) best = i;
    }
    return best;
}

/// Top-k proposal indices for a ground truth row, ordered by score descending
/// with ties to the lower proposal index.
std::vector<std::size_t> top_k_proposals(const ScoreMatrix& m, std::size_t gt, int k) {
    std::vector<std::size_t> idx(m.num_proposals);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto better = [&](std::size_t a, std::size_t b) {
        const double sa = m.score_at(gt, a);
        const double sb = m.score_at(gt, b);
        if (sa != sb) return sa > sb;
        return a < b;
    };
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      better);
    idx.resize(take);
    return idx;
}

/// Turn per-ground-truth selections into labels. A proposal claimed by
/// several ground truths goes to the one with the higher score (ties to the
/// lower index); everything unclaimed is negative, annotated with its best
/// ground truth's score and distance.
AssignmentResult finalize_selections(const ScoreMatrix& m,
                                     const std::vector<std::vector<std::size_t>>& selected) {
    AssignmentResult out;
    out.proposals.resize(m.num_proposals);
    out.positives_per_gt.assign(m.num_gts, 0);

    std::vector<int> claimed_by(m.num_proposals, -1);
    for (std::size_t i = 0; i < selected.size(); ++i) {
        for (std::size_t j : selected[i]) {
            const int prev = claimed_by[j];
            if (prev < 0 || m.score_at(i, j) > m.score_at(static_cast<std::size_t>(prev), j)) {
                claimed_by[j] = static_cast<int>(i);
            }
        }
    }
    for (std::size_t j = 0; j < m.num_proposals; ++j) {
        ProposalAssignment& pa = out.proposals[j];
        if (claimed_by[j] >= 0) {
            const auto i = static_cast<std::size_t>(claimed_by[j]);
            pa = {SampleLabel::Positive, claimed_by[j], m.score_at(i, j), m.distance_at(i, j)};
            ++out.positives_per_gt[i];
        } else {
            const std::size_t i = best_gt_for(m, j);
            pa = {SampleLabel::Negative, -1, m.score_at(i, j), m.distance_at(i, j)};
        }
    }
    return out;
}

double percentile(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double log_normal_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return -0.5 * (d * d / variance + std::log(2.0 * std::numbers::pi * variance));
}

}  // namespace

double score_from_distance(MetricKind metric, double distance) {
    if (!std::isfinite(distance) || distance < 0.0) {
        throw InvalidInputError("distance must be finite and non-negative");
    }
    switch (metric) {
        case MetricKind::Kld: return 1.0 / (2.0 + distance);
        case MetricKind::Bd: return 1.0 / (1.0 + distance * distance);
        case MetricKind::Wd: return 1.0 / (2.0 + distance);
    }
    throw InvalidInputError("unknown metric kind");
}

double score(MetricKind metric, const Gaussian2& g, const Gaussian2& p) {
    return score_from_distance(metric, metric_distance(metric, g, p));
}

ScoreKind score_kind_of(MetricKind metric) {
    switch (metric) {
        case MetricKind::Kld: return ScoreKind::Kld;
        case MetricKind::Bd: return ScoreKind::Bd;
        case MetricKind::Wd: return ScoreKind::Wd;
    }
    throw InvalidInputError("unknown metric kind");
}

const char* to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::Kld: return "kld";
        case ScoreKind::Bd: return "bd";
        case ScoreKind::Wd: return "wd";
        case ScoreKind::IouBaseline: return "iou";
    }
    return "?";
}

const char* to_string(SampleLabel label) {
    switch (label) {
        case SampleLabel::Positive: return "pos";
        case SampleLabel::Negative: return "neg";
        case SampleLabel::Ignore: return "ignore";
    }
    return "?";
}

ScoreMatrix build_score_matrix(MetricKind metric, std::span<const Gaussian2> gts,
                               std::span<const Gaussian2> proposals) {
    if (gts.empty() || proposals.empty()) {
        throw InvalidInputError("score matrix needs at least one ground truth and one proposal");
    }
    ScoreMatrix m;
    m.kind = score_kind_of(metric);
    m.num_gts = gts.size();
    m.num_proposals = proposals.size();
    m.scores.resize(m.num_gts * m.num_proposals);
    m.distances.resize(m.num_gts * m.num_proposals);
    for (std::size_t i = 0; i < gts.size(); ++i) {
        for (std::size_t j = 0; j < proposals.size(); ++j) {
            const double d = metric_distance(metric, gts[i], proposals[j]);
            m.distances[i * m.num_proposals + j] = d;
            m.scores[i * m.num_proposals + j] = score_from_distance(metric, d);
        }
    }
    return m;
}

ScoreMatrix build_iou_score_matrix(std::span<const Obb> gts, std::span<const Gaussian2> proposals) {
    if (gts.empty() || proposals.empty()) {
        throw InvalidInputError("score matrix needs at least one ground truth and one proposal");
    }
    ScoreMatrix m;
    m.kind = ScoreKind::IouBaseline;
    m.num_gts = gts.size();
    m.num_proposals = proposals.size();
    m.scores.resize(m.num_gts * m.num_proposals);
    m.distances.resize(m.num_gts * m.num_proposals);
    std::vector<Obb> decoded;
    decoded.reserve(proposals.size());
    for (const Gaussian2& p : proposals) decoded.push_back(gaussian_to_obb(p));
    for (std::size_t i = 0; i < gts.size(); ++i) {
        for (std::size_t j = 0; j < decoded.size(); ++j) {
            const double iou = rotated_iou(gts[i], decoded[j]);
            m.scores[i * m.num_proposals + j] = iou;
            m.distances[i * m.num_proposals + j] = 1.0 - iou;
        }
    }
    return m;
}

AssignmentResult assign_fixed(const ScoreMatrix& m, double pos_thr, double neg_thr,
                              bool force_match) {
    if (!(neg_thr >= 0.0) || !(neg_thr <= pos_thr)) {
        throw InvalidInputError("thresholds must satisfy 0 <= neg_thr <= pos_thr");
    }
    AssignmentResult out;
    out.proposals.resize(m.num_proposals);
    out.positives_per_gt.assign(m.num_gts, 0);

    for (std::size_t j = 0; j < m.num_proposals; ++j) {
        const std::size_t i = best_gt_for(m, j);
        const double s = m.score_at(i, j);
        ProposalAssignment& pa = out.proposals[j];
        if (s >= pos_thr) {
            pa = {SampleLabel::Positive, static_cast<int>(i), s, m.distance_at(i, j)};
        } else if (s < neg_thr) {
            pa = {SampleLabel::Negative, -1, s, m.distance_at(i, j)};
        } else {
            pa = {SampleLabel::Ignore, -1, s, m.distance_at(i, j)};
        }
    }

    if (force_match) {
        // Promote each ground truth's single best proposal; competing
        // promotions for one proposal go to the higher-scoring ground truth.
        std::vector<int> promoted_to(m.num_proposals, -1);
        for (std::size_t i = 0; i < m.num_gts; ++i) {
            std::size_t best_j = 0;
            for (std::size_t j = 1; j < m.num_proposals; ++j) {
                if (m.score_at(i, j) > m.score_at(i, best_j)) best_j = j;
            }
            const int prev = promoted_to[best_j];
            if (prev < 0 ||
                m.score_at(i, best_j) > m.score_at(static_cast<std::size_t>(prev), best_j)) {
                promoted_to[best_j] = static_cast<int>(i);
            }
        }
        for (std::size_t j = 0; j < m.num_proposals; ++j) {
            if (promoted_to[j] >= 0) {
                const auto i = static_cast<std::size_t>(promoted_to[j]);
                out.proposals[j] =
                    {SampleLabel::Positive, promoted_to[j], m.score_at(i, j), m.distance_at(i, j)};
            }
        }
    }

    std::fill(out.positives_per_gt.begin(), out.positives_per_gt.end(), 0);
    for (const ProposalAssignment& pa : out.proposals) {
        if (pa.label == SampleLabel::Positive) ++out.positives_per_gt[pa.gt];
    }
    return out;
}

double atss_threshold(std::span<const double> values) {
    if (values.empty()) throw InvalidInputError("threshold of an empty value list");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;
    return mean + std::sqrt(var);
}

AssignmentResult assign_atss(const ScoreMatrix& m, int candidates_per_gt) {
    if (candidates_per_gt < 1) throw InvalidInputError("candidate pool size must be >= 1");
    std::vector<std::vector<std::size_t>> selected(m.num_gts);
    for (std::size_t i = 0; i < m.num_gts; ++i) {
        const auto pool = top_k_proposals(m, i, candidates_per_gt);
        std::vector<double> pool_scores;
        pool_scores.reserve(pool.size());
        for (std::size_t j : pool) pool_scores.push_back(m.score_at(i, j));
        const double thr = atss_threshold(pool_scores);
        for (std::size_t j : pool) {
            if (m.score_at(i, j) >= thr) selected[i].push_back(j);
        }
        // A lone outlier can push mean + std above the maximum; keep the
        // guarantee of at least one candidate per ground truth.
        if (selected[i].empty()) selected[i].push_back(pool.front());
    }
    return finalize_selections(m, selected);
}

GmmParams gmm_em_1d(std::span<const double> values, int iters, double tol, std::uint64_t seed) {
    (void)seed;  // the fit is deterministic; the seed is interface bookkeeping
    if (values.size() < 4) {
        throw InvalidInputError("mixture fit needs at least 4 values, got " +
                                std::to_string(values.size()));
    }
    if (iters < 1) throw InvalidInputError("mixture fit needs at least one iteration");

    const std::size_t n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    double mean_all = 0.0;
    for (double v : sorted) mean_all += v;
    mean_all /= static_cast<double>(n);
    double var_all = 0.0;
    for (double v : sorted) var_all += (v - mean_all) * (v - mean_all);
    var_all /= static_cast<double>(n);

    GmmParams fit;
    fit.components[0] = {0.5, percentile(sorted, 0.25),
                         std::max(0.5 * var_all, kGmmVarianceFloor)};
    fit.components[1] = {0.5, percentile(sorted, 0.75),
                         std::max(0.5 * var_all, kGmmVarianceFloor)};
    fit.degenerate = 0.5 * var_all < kGmmVarianceFloor;

    std::vector<double> resp(n);  // responsibility of component 1
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
        // E step (log-domain so vanishing densities stay well defined)
        double ll = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double l0 = std::log(fit.components[0].weight) +
                              log_normal_pdf(values[k], fit.components[0].mean,
                                             fit.components[0].variance);
            const double l1 = std::log(fit.components[1].weight) +
                              log_normal_pdf(values[k], fit.components[1].mean,
                                             fit.components[1].variance);
            const double m = std::max(l0, l1);
            const double e0 = std::exp(l0 - m);
            const double e1 = std::exp(l1 - m);
            resp[k] = e1 / (e0 + e1);
            ll += m + std::log(e0 + e1);
        }
        fit.log_likelihoods.push_back(ll);
        if (it > 0 && ll - prev_ll < tol) break;
        prev_ll = ll;

        // M step
        double n1 = 0.0;
        for (double r : resp) n1 += r;
        const double n0 = static_cast<double>(n) - n1;
        if (n0 < 1e-12 || n1 < 1e-12) {
            fit.degenerate = true;
            break;
        }
        double m0 = 0.0, m1 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            m0 += (1.0 - resp[k]) * values[k];
            m1 += resp[k] * values[k];
        }
        m0 /= n0;
        m1 /= n1;
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            v0 += (1.0 - resp[k]) * (values[k] - m0) * (values[k] - m0);
            v1 += resp[k] * (values[k] - m1) * (values[k] - m1);
        }
        v0 /= n0;
        v1 /= n1;
        if (v0 < kGmmVarianceFloor || v1 < kGmmVarianceFloor) fit.degenerate = true;
        fit.components[0] = {n0 / static_cast<double>(n), m0,
                             std::max(v0, kGmmVarianceFloor)};
        fit.components[1] = {n1 / static_cast<double>(n), m1,
                             std::max(v1, kGmmVarianceFloor)};
    }

    if (fit.components[0].mean > fit.components[1].mean) {
        std::swap(fit.components[0], fit.components[1]);
    }
    const double mean_gap = fit.components[1].mean - fit.components[0].mean;
    if (mean_gap < 1e-9 * std::max(1.0, std::abs(fit.components[1].mean))) {
        fit.degenerate = true;
    }
    return fit;
}

AssignmentResult assign_patss(const ScoreMatrix& m, int candidates_per_gt, std::uint64_t seed) {
    if (candidates_per_gt < 1) throw InvalidInputError("candidate pool size must be >= 1");
    std::vector<std::vector<std::size_t>> selected(m.num_gts);
    for (std::size_t i = 0; i < m.num_gts; ++i) {
        const auto pool = top_k_proposals(m, i, candidates_per_gt);
        std::vector<double> pool_scores;
        pool_scores.reserve(pool.size());
        for (std::size_t j : pool) pool_scores.push_back(m.score_at(i, j));

        bool used_gmm = false;
        if (pool.size() >= 4) {
            const GmmParams fit = gmm_em_1d(pool_scores, 100, 1e-10, seed);
            if (!fit.degenerate) {
                const GmmComponent& low = fit.components[0];
                const GmmComponent& high = fit.components[1];
                for (std::size_t j : pool) {
                    const double s = m.score_at(i, j);
                    const double l_low =
                        std::log(low.weight) + log_normal_pdf(s, low.mean, low.variance);
                    const double l_high =
                        std::log(high.weight) + log_normal_pdf(s, high.mean, high.variance);
                    if (l_high > l_low) selected[i].push_back(j);  // posterior > 1/2
                }
                used_gmm = true;
            }
        }
        if (!used_gmm) {
            const double thr = atss_threshold(pool_scores);
            for (std::size_t j : pool) {
                if (m.score_at(i, j) >= thr) selected[i].push_back(j);
            }
        }
        if (selected[i].empty()) selected[i].push_back(pool.front());
    }
    return finalize_selections(m, selected);
}

}  // namespace gaussbox
