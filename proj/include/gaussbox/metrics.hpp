#pragma once
/**
 * @file metrics.hpp
 * @brief Statistical distances between 2-D Gaussians (KLD, BD, WD) and the
 *        closed-form 2x2 matrix kernels they rely on.
 */

#include "gaussbox/geometry.hpp"

namespace gaussbox {

enum class MetricKind { Kld, Bd, Wd };

const char* to_string(MetricKind metric);
MetricKind metric_kind_from_string(const std::string& name);

/// Kullback-Leibler divergence D(g || p). Asymmetric: the first argument is
/// the ground truth, the second the prediction; the prediction covariance is
/// the one inverted. Scale and rotation invariant under joint transforms.
double kld(const Gaussian2& g, const Gaussian2& p);

/// Bhattacharyya distance. Symmetric; scale invariant under joint scaling.
double bd(const Gaussian2& g, const Gaussian2& p);

/// Squared 2-Wasserstein distance. Symmetric; sqrt(wd) is a true metric.
/// Joint scaling by s multiplies the value by s^2.
double wd(const Gaussian2& g, const Gaussian2& p);

double metric_distance(MetricKind metric, const Gaussian2& g, const Gaussian2& p);

/// Principal square root of a symmetric positive-definite 2x2 matrix:
/// S = (m + sqrt(det m) I) / sqrt(trace m + 2 sqrt(det m)), with S*S = m.
Mat2 spd_sqrt(const Mat2& m);

/// tr((a^1/2 b a^1/2)^1/2) = sqrt(tr(ab) + 2 sqrt(det a det b)) for SPD 2x2
/// inputs; the coupling term of the Wasserstein distance.
double trace_sqrt_product(const Mat2& a, const Mat2& b);

/// Throws InvalidInputError / DegenerateInputError unless m is symmetric
/// positive definite.
void validate_spd(const Mat2& m);

}  // namespace gaussbox
