#pragma once

#include <Eigen/Dense>

namespace mbvp {

/// Nonnegative 2x2 matrix M = [[a, b], [c, d]] built from growth constants.
class ConvMatrix {
public:
    /// Throws NegativeEntry if any entry is negative or non-finite.
    ConvMatrix(double a, double b, double c, double d);
    explicit ConvMatrix(const Eigen::Matrix2d& entries);

    const Eigen::Matrix2d& entries() const noexcept { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    Eigen::Matrix2d m_;
};

struct ConvergenceVerdict {
    bool convergent;
    double spectral_radius;
};

/// rho(M) from the characteristic polynomial; convergent iff rho(M) < 1 (rho = 1 is not).
ConvergenceVerdict is_convergent_to_zero(const ConvMatrix& m);

/// (I - M)^{-1} by the adjugate formula. Throws NotConvergent unless M is convergent to zero.
Eigen::Matrix2d inverse_I_minus_M(const ConvMatrix& m);

struct AprioriBound {
    double beta_u;  // bound on ||u||^2_{H^1}
    double beta_v;  // bound on ||v||^2_{H^1}
    double total;   // sqrt(beta_u) + sqrt(beta_v)
};

/// beta = (I - M)^{-1} (delta T, delta T)^T for the coupled growth system.
AprioriBound apriori_bound_iv(const ConvMatrix& m, double delta, double T);

}  // namespace mbvp
