#pragma once
/**
 * @file losses.hpp
 * @brief Normalized regression losses over the Gaussian distances, analytic
 *        gradients with respect to raw point coordinates, and the
 *        finite-difference verification oracle.
 */

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gaussbox/metrics.hpp"

namespace gaussbox {

enum class LossKind { Kld, Bd, Wd };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);
MetricKind paired_metric(LossKind kind);

/// Normalized loss of a raw distance value:
///   Kld: 1 - 1/(2 + sqrt(d))      range [1/2, 1)
///   Bd:  1 - 1/(1 + d)            range [0, 1)
///   Wd:  1 - 1/(1 + log(1 + d))   range [0, 1)
/// Strictly increasing in d for every kind.
double loss_from_distance(LossKind kind, double distance);

/// Loss between ground truth g and prediction p; distance is computed in
/// (g, p) order, which matters for the asymmetric KLD.
double loss(LossKind kind, const Gaussian2& g, const Gaussian2& p);

struct LossGradient {
    double value = 0.0;
    std::vector<Vec2> d_points;  // d(loss)/d(x_i, y_i), one entry per point
};

/// Analytic gradient of loss(kind, gt, fit(pts)) with respect to the raw
/// point coordinates, chained through the Gaussian fit. Below
/// kSqrtDistanceFloor the KLD loss sits at its floor and the gradient is
/// reported as zero; the sqrt chain is 0/0 there.
LossGradient loss_grad_points(LossKind kind, const Gaussian2& gt, const PointSetRep& pts);

inline constexpr double kSqrtDistanceFloor = 1e-12;

/// Central differences per coordinate. The default step is
/// 1e-5 * max(1, |coordinate|); the explicit-step overload requires step > 0.
LossGradient fd_gradient(LossKind kind, const Gaussian2& gt, const PointSetRep& pts);
LossGradient fd_gradient(LossKind kind, const Gaussian2& gt, const PointSetRep& pts, double step);

/// Central-difference gradient of an arbitrary scalar function of a point
/// set; step <= 0 selects the per-coordinate default above. Shared by
/// fd_gradient and the convergence-order tests.
template <typename F>
std::vector<Vec2> central_difference(F&& f, const PointSetRep& pts, double step) {
    std::vector<Vec2> grad(pts.points.size(), Vec2::Zero());
    PointSetRep probe = pts;
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        for (int axis = 0; axis < 2; ++axis) {
            const double x0 = pts.points[i][axis];
            const double h = step > 0.0 ? step : 1e-5 * std::max(1.0, std::abs(x0));
            probe.points[i][axis] = x0 + h;
            const double fp = f(probe);
            probe.points[i][axis] = x0 - h;
            const double fm = f(probe);
            probe.points[i][axis] = x0;
            grad[i][axis] = (fp - fm) / (2.0 * h);
        }
    }
    return grad;
}

/// One row of the normalization-design comparison: a candidate loss shape and
/// the score shape it was evaluated with. `loss_fn` / `score_fn` map a raw
/// distance value; exactly one candidate per metric is flagged as chosen.
struct NormalizationCandidate {
    std::string loss_label;
    std::string score_label;
    std::function<double(double)> loss_fn;
    std::function<double(double)> score_fn;
    bool chosen = false;
};

std::vector<NormalizationCandidate> candidate_normalizations(MetricKind metric);

}  // namespace gaussbox
