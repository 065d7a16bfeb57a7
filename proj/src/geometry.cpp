#include "gaussbox/geometry.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "gaussbox/random.hpp"

namespace gaussbox {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

double cross(const Vec2& a, const Vec2& b) {
    return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

SymEig2 sym_eig2(const Mat2& m) {
    const double a = m(0, 0);
    const double b = 0.5 * (m(0, 1) + m(1, 0));
    const double c = m(1, 1);
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), b);
    // atan2(0, 0) = 0, so diagonal and isotropic input decode to angle 0.
    const double angle = 0.5 * std::atan2(2.0 * b, a - c);
    return {mean + r, mean - r, angle};
}

double fold_half_pi(double theta) {
    double t = std::fmod(theta + kHalfPi, kPi);
    if (t < 0.0) t += kPi;
    if (t >= kPi) t -= kPi;  // fmod result of -eps rounds up to pi
    return t - kHalfPi;
}

void validate_obb(const Obb& box) {
    if (!std::isfinite(box.cx) || !std::isfinite(box.cy) || !std::isfinite(box.w) ||
        !std::isfinite(box.h) || !std::isfinite(box.theta)) {
        throw InvalidInputError("oriented box has a non-finite field");
    }
    if (!(box.w > 0.0) || !(box.h > 0.0)) {
        throw InvalidInputError("oriented box sides must be positive, got w=" +
                                std::to_string(box.w) + " h=" + std::to_string(box.h));
    }
}

void validate_gaussian(const Gaussian2& g) {
    if (!g.mu.allFinite() || !g.sigma.allFinite()) {
        throw InvalidInputError("gaussian has a non-finite field");
    }
    const double asym = std::abs(g.sigma(0, 1) - g.sigma(1, 0));
    if (asym > 1e-12 * (1.0 + std::abs(g.sigma(0, 1)))) {
        throw InvalidInputError("gaussian covariance is not symmetric");
    }
    const double det = g.sigma(0, 0) * g.sigma(1, 1) - g.sigma(0, 1) * g.sigma(1, 0);
    if (!(det > 0.0) || !(g.sigma.trace() > 0.0)) {
        throw DegenerateInputError("gaussian covariance is not positive definite");
    }
}

Gaussian2 obb_to_gaussian(const Obb& box) {
    validate_obb(box);
    const double c = std::cos(box.theta);
    const double s = std::sin(box.theta);
    const double l1 = box.w * box.w / 4.0;
    const double l2 = box.h * box.h / 4.0;
    Mat2 sigma;
    sigma << l1 * c * c + l2 * s * s, (l1 - l2) * c * s,
             (l1 - l2) * c * s,       l1 * s * s + l2 * c * c;
    return {box.center(), sigma};
}

Obb gaussian_to_obb(const Gaussian2& g) {
    validate_gaussian(g);
    const SymEig2 eig = sym_eig2(g.sigma);
    if (!(eig.lambda_min > 0.0)) {
        throw DegenerateInputError("gaussian covariance is numerically singular");
    }
    double theta = 0.0;
    if (eig.lambda_max >= eig.lambda_min * (1.0 + kSquareDecodeTol)) {
        theta = fold_half_pi(eig.angle);
    }
    return {g.mu.x(), g.mu.y(), 2.0 * std::sqrt(eig.lambda_max),
            2.0 * std::sqrt(eig.lambda_min), theta};
}

Gaussian2 fit_gaussian_mle(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    if (n < 3) {
        throw InvalidInputError("point set needs at least 3 points, got " + std::to_string(n));
    }
    for (const Vec2& p : pts) {
        if (!p.allFinite()) throw InvalidInputError("point set contains a non-finite coordinate");
    }

    // Canonical accumulation order makes the fit exactly permutation-invariant.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (pts[i].x() != pts[j].x()) return pts[i].x() < pts[j].x();
        return pts[i].y() < pts[j].y();
    });

    Vec2 mu = Vec2::Zero();
    for (std::size_t i : order) mu += pts[i];
    mu /= static_cast<double>(n);

    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    for (std::size_t i : order) {
        const Vec2 d = pts[i] - mu;
        m00 += d.x() * d.x();
        m01 += d.x() * d.y();
        m11 += d.y() * d.y();
    }
    m00 /= static_cast<double>(n);
    m01 /= static_cast<double>(n);
    m11 /= static_cast<double>(n);

    const double trace = m00 + m11;
    if (!(trace > kRankZeroFloor * std::max(1.0, mu.squaredNorm()))) {
        throw DegenerateInputError("all points coincide; covariance has rank zero");
    }

    Mat2 sigma;
    sigma << m00, m01, m01, m11;
    const double eps = kCovRegularizationScale * std::max(trace, 1.0);
    if (sym_eig2(sigma).lambda_min < eps) {
        sigma += eps * Mat2::Identity();
    }
    return {mu, sigma};
}

Gaussian2 fit_gaussian_mle(const PointSetRep& pts) {
    return fit_gaussian_mle(std::span<const Vec2>(pts.points));
}

Gaussian2 fit_gaussian_mle(const Qbb& q) {
    return fit_gaussian_mle(std::span<const Vec2>(q.corners));
}

PointSetRep apply_offsets(const PointSetRep& pts, std::span<const Vec2> offsets) {
    if (offsets.size() != pts.points.size()) {
        throw InvalidInputError("offset count " + std::to_string(offsets.size()) +
                                " does not match point count " + std::to_string(pts.points.size()));
    }
    PointSetRep out = pts;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        out.points[i] += offsets[i];
    }
    return out;
}

Qbb obb_to_qbb(const Obb& box) {
    validate_obb(box);
    const double c = std::cos(box.theta);
    const double s = std::sin(box.theta);
    const double hw = box.w / 2.0;
    const double hh = box.h / 2.0;
    const auto corner = [&](double u, double v) -> Vec2 {
        return {box.cx + c * u - s * v, box.cy + s * u + c * v};
    };
    return {{corner(hw, hh), corner(-hw, hh), corner(-hw, -hh), corner(hw, -hh)}};
}

Obb canonicalize_obb(const Obb& box) {
    validate_obb(box);
    if (box.w >= box.h && box.theta >= -kHalfPi && box.theta < kHalfPi) {
        return box;  // exact identity on already-canonical boxes
    }
    double w = box.w, h = box.h, theta = box.theta;
    if (w < h) {
        std::swap(w, h);
        theta += kHalfPi;
    }
    return {box.cx, box.cy, w, h, fold_half_pi(theta)};
}

double gaussian_density(const Gaussian2& g, const Vec2& x) {
    validate_gaussian(g);
    const double det = g.sigma(0, 0) * g.sigma(1, 1) - g.sigma(0, 1) * g.sigma(1, 0);
    const Vec2 d = x - g.mu;
    const double quad = (d.x() * (g.sigma(1, 1) * d.x() - g.sigma(0, 1) * d.y()) +
                         d.y() * (g.sigma(0, 0) * d.y() - g.sigma(1, 0) * d.x())) / det;
    return std::exp(-0.5 * quad) / (2.0 * kPi * std::sqrt(det));
}

double polygon_area(std::span<const Vec2> poly) {
    if (poly.size() < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        twice += cross(p, q);
    }
    return std::abs(twice) / 2.0;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> output(subject.begin(), subject.end());
    for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
        const Vec2& a = clip[e];
        const Vec2& b = clip[(e + 1) % clip.size()];
        const Vec2 dir = b - a;
        const std::vector<Vec2> input = std::move(output);
        output.clear();
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Vec2& prev = input[(i + input.size() - 1) % input.size()];
            const Vec2& cur = input[i];
            const double fprev = cross(dir, prev - a);
            const double fcur = cross(dir, cur - a);
            const bool prev_in = fprev >= 0.0;  // boundary counts as inside
            const bool cur_in = fcur >= 0.0;
            if (cur_in != prev_in) {
                const double t = fprev / (fprev - fcur);
                output.push_back(prev + t * (cur - prev));
            }
            if (cur_in) output.push_back(cur);
        }
    }
    return output;
}

double rotated_iou(const Obb& a, const Obb& b) {
    const Qbb qa = obb_to_qbb(a);
    const Qbb qb = obb_to_qbb(b);
    // Shoelace areas throughout so identical boxes give exactly 1.
    const double area_a = polygon_area(qa.corners);
    const double area_b = polygon_area(qb.corners);
    const auto inter_poly = clip_convex(qa.corners, qb.corners);
    const double inter = polygon_area(inter_poly);
    const double uni = area_a + area_b - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

bool point_in_obb(const Obb& box, const Vec2& p) {
    const double c = std::cos(box.theta);
    const double s = std::sin(box.theta);
    const Vec2 d = p - box.center();
    const double u = c * d.x() + s * d.y();
    const double v = -s * d.x() + c * d.y();
    return std::abs(u) <= box.w / 2.0 && std::abs(v) <= box.h / 2.0;
}

double mc_iou(const Obb& a, const Obb& b, std::size_t samples, std::uint64_t seed) {
    validate_obb(a);
    validate_obb(b);
    if (samples < 10000) {
        throw InvalidInputError("mc_iou needs at least 10^4 samples");
    }
    Vec2 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const Qbb& q : {obb_to_qbb(a), obb_to_qbb(b)}) {
        for (const Vec2& p : q.corners) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    }
    std::mt19937_64 rng(seed);
    std::size_t in_union = 0, in_inter = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec2 p(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
        const bool ina = point_in_obb(a, p);
        const bool inb = point_in_obb(b, p);
        in_union += (ina || inb);
        in_inter += (ina && inb);
    }
    if (in_union == 0) return 0.0;
    return static_cast<double>(in_inter) / static_cast<double>(in_union);
}

}  // namespace gaussbox
