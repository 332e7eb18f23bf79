#include "mbvp/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mbvp/errors.hpp"

namespace mbvp {

namespace {

// Largest scaling phi_inverse may apply; keeps |result| < 1 after rounding.
constexpr double kMaxInverseScale = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();

double light_cone_gap(const Vec& y) {
    const double r = y.norm();
    if (!std::isfinite(r) || !(r < kBallLimit)) {
        throw DomainError("phi: |y| = " + std::to_string(r) + " is not inside the ball of radius 1 - 1e-12");
    }
    return (1.0 - r) * (1.0 + r);
}

}  // namespace

Vec phi(const Vec& y) {
    return y / std::sqrt(light_cone_gap(y));
}

Vec phi_inverse(const Vec& z) {
    const double r = z.stableNorm();
    if (r == 0.0) {
        return Vec::Zero(z.size());
    }
    const double radius = std::min(r / std::hypot(1.0, r), kMaxInverseScale);
    return z * (radius / r);
}

Mat phi_jacobian(const Vec& y) {
    const double gap = light_cone_gap(y);
    const double s = std::sqrt(gap);
    const auto q = y.size();
    return Mat::Identity(q, q) / s + (y * y.transpose()) / (gap * s);
}

Mat phi_inverse_jacobian(const Vec& z) {
    const double one_plus = 1.0 + z.squaredNorm();
    const double scale = std::pow(one_plus, -1.5);
    const auto q = z.size();
    return (Mat::Identity(q, q) * one_plus - z * z.transpose()) * scale;
}

}  // namespace mbvp
