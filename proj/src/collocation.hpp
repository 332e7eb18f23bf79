#pragma once

// Trapezoidal collocation of the first-order system u' = phi^{-1}(w), w' = u - h
// and the damped Newton driver shared by the linear and coupled solvers.

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "mbvp/boundary.hpp"
#include "mbvp/grid.hpp"

namespace mbvp::detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Position of one component's unknowns (and residual rows) inside a stacked vector.
/// Unknowns are node-major: [u_0, w_0, u_1, w_1, ..., u_N, w_N].
/// Rows: [0, 2q) boundary closure, then 2q per subinterval (q u-defect rows, q w-defect rows).
struct Block {
    int q;
    int nodes;
    Eigen::Index offset;

    Eigen::Index size() const { return 2 * static_cast<Eigen::Index>(q) * nodes; }
    Eigen::Index u_index(int i, int k) const { return offset + 2 * static_cast<Eigen::Index>(q) * i + k; }
    Eigen::Index w_index(int i, int k) const { return u_index(i, k) + q; }
    Eigen::Index bc_row(int k) const { return offset + k; }
    Eigen::Index u_row(int interval, int k) const {
        return offset + 2 * static_cast<Eigen::Index>(q) * (interval + 1) + k;
    }
    Eigen::Index w_row(int interval, int k) const { return u_row(interval, k) + q; }
};

GridFunction unpack(const Eigen::VectorXd& x, const Block& block);
void pack(const GridFunction& gf, const Block& block, Eigen::VectorXd& x);

/// Collocation and boundary residual of one component with right-hand side h
/// ((N+1) x q nodal values), written into the block's rows of `out`.
void component_residual(const Grid& grid, const BoundaryOperator& op, double lambda, const GridFunction& gf,
                        const Mat& h, const Block& block, Eigen::VectorXd& out);

/// Jacobian entries of component_residual with respect to the block's own unknowns, h held fixed.
void component_jacobian(const Grid& grid, const BoundaryOperator& op, double lambda, const GridFunction& gf,
                        const Block& block, Triplets& triplets);

struct ResidualNorms {
    double ode;
    double bc;
};

/// Infinity norms of the collocation rows and the boundary rows of one block.
ResidualNorms block_norms(const Eigen::VectorXd& residual, const Block& block);

struct NewtonSettings {
    double tol;
    int max_iter;
    int max_halvings;
};

struct NewtonOutcome {
    bool converged;
    int iterations;
    double residual_inf;
};

/// Fills F(x). May throw EvalError; a throwing trial point is treated as a rejected step.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residual)>;
using JacobianFn = std::function<void(const Eigen::VectorXd& x, Triplets& triplets)>;

/// Newton with Armijo halving on the 2-norm; stops once ||F||_inf <= tol.
/// `x` holds the best iterate on return.
NewtonOutcome damped_newton(Eigen::VectorXd& x, const ResidualFn& residual, const JacobianFn& jacobian,
                            const NewtonSettings& settings);

}  // namespace mbvp::detail
