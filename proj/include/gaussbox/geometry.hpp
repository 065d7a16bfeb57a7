#pragma once
/**
 * @file geometry.hpp
 * @brief Oriented-box, quadrilateral, point-set and 2-D Gaussian types with
 *        the conversions between them, plus a rotated-IoU baseline metric.
 */

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gaussbox/error.hpp"

namespace gaussbox {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Oriented box: center, width, height, rotation in radians.
/// Canonical form (see canonicalize_obb) has w >= h and theta in [-pi/2, pi/2).
struct Obb {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double theta = 0.0;

    Vec2 center() const { return {cx, cy}; }
    double area() const { return w * h; }
    double aspect_ratio() const { return std::max(w, h) / std::min(w, h); }
};

/// Quadrilateral described by its four corners. No corner ordering is assumed
/// on input; everything downstream fits a Gaussian, which is order-invariant.
struct Qbb {
    std::array<Vec2, 4> corners{};
};

/// K movable points describing an object. K >= 3 so a 2-D covariance exists.
struct PointSetRep {
    std::vector<Vec2> points;

    std::size_t size() const { return points.size(); }
};

inline constexpr int kDefaultPointCount = 9;

/// 2-D Gaussian: mean and symmetric positive-definite covariance.
struct Gaussian2 {
    Vec2 mu = Vec2::Zero();
    Mat2 sigma = Mat2::Identity();
};

/// Covariance regularization: when lambda_min < scale, add scale * I, with
/// scale = kCovRegularizationScale * max(trace, 1).
inline constexpr double kCovRegularizationScale = 1e-7;

/// A fitted covariance whose trace is below this (relative to the mean's
/// magnitude) is rank zero and cannot be regularized meaningfully.
inline constexpr double kRankZeroFloor = 1e-28;

/// Eigenvalue ratio below which a Gaussian decodes as a square with theta = 0;
/// the angle of a near-isotropic Gaussian is not identifiable.
inline constexpr double kSquareDecodeTol = 1e-9;

/// Closed-form eigendecomposition of a symmetric 2x2 matrix (half-angle
/// formula on (m00 - m11, 2*m01)). `angle` is the direction of the eigenvector
/// paired with `lambda_max`; exact for diagonal input.
struct SymEig2 {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double angle = 0.0;
};
SymEig2 sym_eig2(const Mat2& m);

/// Fold an angle into [-pi/2, pi/2), modulo pi.
double fold_half_pi(double theta);

/// Throws InvalidInputError on non-finite fields or non-positive sides.
void validate_obb(const Obb& box);

/// Throws InvalidInputError on non-finite/asymmetric sigma and
/// DegenerateInputError when sigma is not positive definite.
void validate_gaussian(const Gaussian2& g);

Gaussian2 obb_to_gaussian(const Obb& box);
Obb gaussian_to_obb(const Gaussian2& g);

/// Sample mean plus population covariance (divisor N), regularized if nearly
/// singular. Accumulation runs in a canonical point order, so the result is
/// bit-for-bit invariant under permutations of the input.
Gaussian2 fit_gaussian_mle(std::span<const Vec2> pts);
Gaussian2 fit_gaussian_mle(const PointSetRep& pts);
Gaussian2 fit_gaussian_mle(const Qbb& q);

/// Pointwise sum; offsets.size() must equal pts.size().
PointSetRep apply_offsets(const PointSetRep& pts, std::span<const Vec2> offsets);

/// Corners in counter-clockwise order starting from the corner rotated from
/// (+w/2, +h/2).
Qbb obb_to_qbb(const Obb& box);

/// Resolve the (w,h,theta) <-> (h,w,theta+pi/2) symmetry: long side first,
/// theta in [-pi/2, pi/2). Boxes already canonical are returned unchanged.
Obb canonicalize_obb(const Obb& box);

double gaussian_density(const Gaussian2& g, const Vec2& x);

/// Exact intersection-over-union of two oriented boxes via convex polygon
/// clipping and the shoelace area.
double rotated_iou(const Obb& a, const Obb& b);

/// Monte-Carlo IoU over the bounding box of the union; the verification
/// oracle for rotated_iou. Requires samples >= 10^4; deterministic per seed.
double mc_iou(const Obb& a, const Obb& b, std::size_t samples, std::uint64_t seed);

bool point_in_obb(const Obb& box, const Vec2& p);

/// Signed area is positive for counter-clockwise polygons; returns |area|.
double polygon_area(std::span<const Vec2> poly);

/// Sutherland-Hodgman clip of a convex subject polygon against a convex
/// counter-clockwise clip polygon.
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

}  // namespace gaussbox
