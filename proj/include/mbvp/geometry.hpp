#pragma once

#include <Eigen/Dense>

namespace mbvp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Arguments of phi must have Euclidean norm strictly below this value.
inline constexpr double kBallLimit = 1.0 - 1e-12;

/// The relativistic homeomorphism phi(y) = y / sqrt(1 - |y|^2) of the open unit
/// ball onto R^q. Throws DomainError when |y| >= kBallLimit.
Vec phi(const Vec& y);

/// phi^{-1}(z) = z / sqrt(1 + |z|^2). Total on R^q; the result always has norm < 1.
Vec phi_inverse(const Vec& z);

/// Derivative of phi at y: I / s + y y^T / s^3 with s = sqrt(1 - |y|^2).
Mat phi_jacobian(const Vec& y);

/// Derivative of phi^{-1} at z: (I (1 + |z|^2) - z z^T) / (1 + |z|^2)^{3/2}.
Mat phi_inverse_jacobian(const Vec& z);

}  // namespace mbvp
