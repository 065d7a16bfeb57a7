#include "gaussbox/losses.hpp"

#include <cmath>

namespace gaussbox {

namespace {

double det2(const Mat2& m) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

Mat2 inv2(const Mat2& m) {
    const double det = det2(m);
    Mat2 inv;
    inv << m(1, 1) / det, -m(0, 1) / det,
           -m(1, 0) / det, m(0, 0) / det;
    return inv;
}

/// Distance value with its derivatives with respect to the prediction's mean
/// and covariance. The covariance gradient follows the full-matrix convention
/// (all four entries independent), which is what the point chain rule expects.
struct DistanceGrad {
    double value = 0.0;
    Vec2 d_mu = Vec2::Zero();
    Mat2 d_sigma = Mat2::Zero();
};

DistanceGrad kld_grad(const Gaussian2& g, const Gaussian2& p) {
    DistanceGrad out;
    out.value = kld(g, p);
    const Mat2 inv_p = inv2(p.sigma);
    const Vec2 dmu = p.mu - g.mu;
    const Vec2 w = inv_p * dmu;
    out.d_mu = w;
    out.d_sigma = 0.5 * (inv_p - inv_p * g.sigma * inv_p - w * w.transpose());
    return out;
}

DistanceGrad bd_grad(const Gaussian2& g, const Gaussian2& p) {
    DistanceGrad out;
    out.value = bd(g, p);
    const Mat2 mixed = 0.5 * (p.sigma + g.sigma);
    const Mat2 inv_mixed = inv2(mixed);
    const Vec2 dmu = p.mu - g.mu;
    const Vec2 w = inv_mixed * dmu;
    out.d_mu = 0.25 * w;
    out.d_sigma = -(1.0 / 16.0) * (w * w.transpose()) + 0.25 * inv_mixed - 0.25 * inv2(p.sigma);
    return out;
}

DistanceGrad wd_grad(const Gaussian2& g, const Gaussian2& p) {
    DistanceGrad out;
    out.value = wd(g, p);
    out.d_mu = 2.0 * (p.mu - g.mu);
    const double coupling = trace_sqrt_product(p.sigma, g.sigma);
    const double root_dets = std::sqrt(det2(p.sigma) * det2(g.sigma));
    out.d_sigma = Mat2::Identity() - (g.sigma + root_dets * inv2(p.sigma)) / coupling;
    return out;
}

DistanceGrad distance_grad(MetricKind metric, const Gaussian2& g, const Gaussian2& p) {
    switch (metric) {
        case MetricKind::Kld: return kld_grad(g, p);
        case MetricKind::Bd: return bd_grad(g, p);
        case MetricKind::Wd: return wd_grad(g, p);
    }
    throw InvalidInputError("unknown metric kind");
}

/// d(loss)/d(distance). Zero for KLD when the distance is numerically at the
/// optimum, where the sqrt chain would be 0/0.
double loss_prefactor(LossKind kind, double d) {
    switch (kind) {
        case LossKind::Kld: {
            const double s = std::sqrt(std::max(d, 0.0));
            if (s < kSqrtDistanceFloor) return 0.0;
            return 1.0 / ((2.0 + s) * (2.0 + s) * 2.0 * s);
        }
        case LossKind::Bd:
            return 1.0 / ((1.0 + d) * (1.0 + d));
        case LossKind::Wd: {
            const double l = 1.0 + std::log1p(d);
            return 1.0 / (l * l * (1.0 + d));
        }
    }
    throw InvalidInputError("unknown loss kind");
}

}  // namespace

const char* to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Kld: return "lkld";
        case LossKind::Bd: return "lbd";
        case LossKind::Wd: return "lwd";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "lkld") return LossKind::Kld;
    if (name == "lbd") return LossKind::Bd;
    if (name == "lwd") return LossKind::Wd;
    throw InvalidInputError("unknown loss '" + name + "' (expected lkld|lbd|lwd)");
}

MetricKind paired_metric(LossKind kind) {
    switch (kind) {
        case LossKind::Kld: return MetricKind::Kld;
        case LossKind::Bd: return MetricKind::Bd;
        case LossKind::Wd: return MetricKind::Wd;
    }
    throw InvalidInputError("unknown loss kind");
}

double loss_from_distance(LossKind kind, double distance) {
    if (!std::isfinite(distance) || distance < 0.0) {
        throw InvalidInputError("distance must be finite and non-negative");
    }
    switch (kind) {
        case LossKind::Kld: return 1.0 - 1.0 / (2.0 + std::sqrt(distance));
        case LossKind::Bd: return 1.0 - 1.0 / (1.0 + distance);
        case LossKind::Wd: return 1.0 - 1.0 / (1.0 + std::log1p(distance));
    }
    throw InvalidInputError("unknown loss kind");
}

double loss(LossKind kind, const Gaussian2& g, const Gaussian2& p) {
    return loss_from_distance(kind, metric_distance(paired_metric(kind), g, p));
}

LossGradient loss_grad_points(LossKind kind, const Gaussian2& gt, const PointSetRep& pts) {
    const Gaussian2 fit = fit_gaussian_mle(pts);
    const DistanceGrad dg = distance_grad(paired_metric(kind), gt, fit);
    const double pre = loss_prefactor(kind, dg.value);
    const double n = static_cast<double>(pts.points.size());

    LossGradient out;
    out.value = loss_from_distance(kind, dg.value);
    out.d_points.resize(pts.points.size());
    for (std::size_t i = 0; i < pts.points.size(); ++i) {
        const Vec2 dev = pts.points[i] - fit.mu;
        // d(sigma_ab)/d(x_ic) = (delta_ac dev_b + delta_bc dev_a) / n, and the
        // mean contributes d_mu / n per point.
        out.d_points[i] = pre * (2.0 * dg.d_sigma * dev + dg.d_mu) / n;
    }
    return out;
}

LossGradient fd_gradient(LossKind kind, const Gaussian2& gt, const PointSetRep& pts) {
    LossGradient out;
    out.value = loss(kind, gt, fit_gaussian_mle(pts));
    out.d_points = central_difference(
        [&](const PointSetRep& q) { return loss(kind, gt, fit_gaussian_mle(q)); }, pts, 0.0);
    return out;
}

LossGradient fd_gradient(LossKind kind, const Gaussian2& gt, const PointSetRep& pts, double step) {
    if (!(step > 0.0)) throw InvalidInputError("finite-difference step must be positive");
    LossGradient out;
    out.value = loss(kind, gt, fit_gaussian_mle(pts));
    out.d_points = central_difference(
        [&](const PointSetRep& q) { return loss(kind, gt, fit_gaussian_mle(q)); }, pts, step);
    return out;
}

std::vector<NormalizationCandidate> candidate_normalizations(MetricKind metric) {
    const auto inv2plus = [](double d) { return 1.0 / (2.0 + d); };
    const auto inv2plus_sqrt = [](double d) { return 1.0 / (2.0 + std::sqrt(d)); };
    const auto inv1plus_sq = [](double d) { return 1.0 / (1.0 + d * d); };
    const auto inv1plus = [](double d) { return 1.0 / (1.0 + d); };

    std::vector<NormalizationCandidate> rows;
    switch (metric) {
        case MetricKind::Kld:
            rows = {
                {"1 - 1/(2 + sqrt(D))", "1/(2 + D)",
                 [](double d) { return 1.0 - 1.0 / (2.0 + std::sqrt(d)); }, inv2plus, true},
                {"1 - exp(-sqrt(D))", "1/(2 + D)",
                 [](double d) { return 1.0 - std::exp(-std::sqrt(d)); }, inv2plus, false},
                {"1 - exp(-D^2)", "1/(2 + D)",
                 [](double d) { return 1.0 - std::exp(-d * d); }, inv2plus, false},
                {"1 - 1/(2 + sqrt(D))", "1/(2 + sqrt(D))",
                 [](double d) { return 1.0 - 1.0 / (2.0 + std::sqrt(d)); }, inv2plus_sqrt, false},
            };
            break;
        case MetricKind::Bd:
            rows = {
                {"1 - 1/(1 + D)", "1/(1 + D^2)",
                 [](double d) { return 1.0 - 1.0 / (1.0 + d); }, inv1plus_sq, true},
                {"log(1 + D)", "1/(1 + D^2)",
                 [](double d) { return std::log1p(d); }, inv1plus_sq, false},
                {"5 * D", "1/(1 + D^2)",
                 [](double d) { return 5.0 * d; }, inv1plus_sq, false},
                {"1 - 1/(1 + D)", "1/(1 + D)",
                 [](double d) { return 1.0 - 1.0 / (1.0 + d); }, inv1plus, false},
            };
            break;
        case MetricKind::Wd:
            rows = {
                {"1 - 1/(1 + log(1 + D))", "1/(2 + D)",
                 [](double d) { return 1.0 - 1.0 / (1.0 + std::log1p(d)); }, inv2plus, true},
                {"1 - 1/(2 + sqrt(D))", "1/(2 + D)",
                 [](double d) { return 1.0 - 1.0 / (2.0 + std::sqrt(d)); }, inv2plus, false},
                {"1 - exp(-sqrt(D))", "1/(2 + D)",
                 [](double d) { return 1.0 - std::exp(-std::sqrt(d)); }, inv2plus, false},
                {"1 - 1/(1 + log(1 + D))", "1/(2 + sqrt(D))",
                 [](double d) { return 1.0 - 1.0 / (1.0 + std::log1p(d)); }, inv2plus_sqrt, false},
            };
            break;
    }
    return rows;
}

}  // namespace gaussbox
