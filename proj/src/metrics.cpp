#include "gaussbox/metrics.hpp"

#include <cmath>

namespace gaussbox {

namespace {

double det2(const Mat2& m) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

Mat2 inv2(const Mat2& m, double det) {
    Mat2 inv;
    inv << m(1, 1) / det, -m(0, 1) / det,
           -m(1, 0) / det, m(0, 0) / det;
    return inv;
}

}  // namespace

const char* to_string(MetricKind metric) {
    switch (metric) {
        case MetricKind::Kld: return "kld";
        case MetricKind::Bd: return "bd";
        case MetricKind::Wd: return "wd";
    }
    return "?";
}

MetricKind metric_kind_from_string(const std::string& name) {
    if (name == "kld") return MetricKind::Kld;
    if (name == "bd") return MetricKind::Bd;
    if (name == "wd") return MetricKind::Wd;
    throw InvalidInputError("unknown metric '" + name + "' (expected kld|bd|wd)");
}

void validate_spd(const Mat2& m) {
    if (!m.allFinite()) throw InvalidInputError("matrix has a non-finite entry");
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + std::abs(m(0, 1)))) {
        throw InvalidInputError("matrix is not symmetric");
    }
    if (!(det2(m) > 0.0) || !(m.trace() > 0.0)) {
        throw DegenerateInputError("matrix is not positive definite");
    }
}

double kld(const Gaussian2& g, const Gaussian2& p) {
    validate_gaussian(g);
    validate_gaussian(p);
    const double det_g = det2(g.sigma);
    const double det_p = det2(p.sigma);
    const Mat2 inv_p = inv2(p.sigma, det_p);
    const Vec2 dmu = p.mu - g.mu;
    const double value = 0.5 * ((inv_p * g.sigma).trace() + std::log(det_p / det_g) - 2.0 +
                                dmu.dot(inv_p * dmu));
    return std::max(value, 0.0);
}

double bd(const Gaussian2& g, const Gaussian2& p) {
    validate_gaussian(g);
    validate_gaussian(p);
    const Mat2 mixed = 0.5 * (p.sigma + g.sigma);
    const double det_mixed = det2(mixed);
    const Vec2 dmu = g.mu - p.mu;
    const double quad = dmu.dot(inv2(mixed, det_mixed) * dmu) / 8.0;
    const double value =
        quad + 0.5 * std::log(det_mixed / std::sqrt(det2(g.sigma) * det2(p.sigma)));
    return std::max(value, 0.0);
}

double wd(const Gaussian2& g, const Gaussian2& p) {
    validate_gaussian(g);
    validate_gaussian(p);
    const double value = (p.mu - g.mu).squaredNorm() + p.sigma.trace() + g.sigma.trace() -
                         2.0 * trace_sqrt_product(p.sigma, g.sigma);
    return std::max(value, 0.0);
}

double metric_distance(MetricKind metric, const Gaussian2& g, const Gaussian2& p) {
    switch (metric) {
        case MetricKind::Kld: return kld(g, p);
        case MetricKind::Bd: return bd(g, p);
        case MetricKind::Wd: return wd(g, p);
    }
    throw InvalidInputError("unknown metric kind");
}

Mat2 spd_sqrt(const Mat2& m) {
    validate_spd(m);
    const double root_det = std::sqrt(det2(m));
    return (m + root_det * Mat2::Identity()) / std::sqrt(m.trace() + 2.0 * root_det);
}

double trace_sqrt_product(const Mat2& a, const Mat2& b) {
    validate_spd(a);
    validate_spd(b);
    const double tr_ab = a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0) + a(1, 0) * b(0, 1) +
                         a(1, 1) * b(1, 1);
    const double inner = tr_ab + 2.0 * std::sqrt(det2(a) * det2(b));
    return std::sqrt(std::max(inner, 0.0));
}

}  // namespace gaussbox
