#include "mbvp/matrices.hpp"

#include <algorithm>
#include <cmath>

#include "mbvp/errors.hpp"

namespace mbvp {

ConvMatrix::ConvMatrix(double a, double b, double c, double d) {
    m_ << a, b, c, d;
    if (!m_.allFinite() || (m_.array() < 0.0).any()) {
        throw NegativeEntry("convergent-to-zero test requires finite nonnegative entries");
    }
}

ConvMatrix::ConvMatrix(const Eigen::Matrix2d& entries)
    : ConvMatrix(entries(0, 0), entries(0, 1), entries(1, 0), entries(1, 1)) {}

ConvergenceVerdict is_convergent_to_zero(const ConvMatrix& m) {
    const auto& e = m.entries();
    // Nonnegative entries make the discriminant (a - d)^2 / 4 + bc nonnegative,
    // so both eigenvalues are real and the Perron root is half_trace + sqrt(disc).
    const double half_trace = 0.5 * (e(0, 0) + e(1, 1));
    const double half_gap = 0.5 * (e(0, 0) - e(1, 1));
    const double disc = half_gap * half_gap + e(0, 1) * e(1, 0);
    const double root = std::sqrt(disc);
    const double rho = std::max(std::abs(half_trace + root), std::abs(half_trace - root));
    return {rho < 1.0, rho};
}

Eigen::Matrix2d inverse_I_minus_M(const ConvMatrix& m) {
    if (!is_convergent_to_zero(m).convergent) {
        throw NotConvergent("(I - M)^{-1}: M is not convergent to zero");
    }
    const Eigen::Matrix2d shifted = Eigen::Matrix2d::Identity() - m.entries();
    const double det = shifted(0, 0) * shifted(1, 1) - shifted(0, 1) * shifted(1, 0);
    Eigen::Matrix2d adj;
    adj << shifted(1, 1), -shifted(0, 1), -shifted(1, 0), shifted(0, 0);
    return adj / det;
}

AprioriBound apriori_bound_iv(const ConvMatrix& m, double delta, double T) {
    if (!(delta >= 0.0) || !(T > 0.0)) {
        throw InvalidParams("apriori bound requires delta >= 0 and T > 0");
    }
    const Eigen::Vector2d rhs = Eigen::Vector2d::Constant(delta * T);
    const Eigen::Vector2d beta = inverse_I_minus_M(m) * rhs;
    return {beta(0), beta(1), std::sqrt(beta(0)) + std::sqrt(beta(1))};
}

}  // namespace mbvp
