#pragma once

#include <functional>
#include <optional>

#include "mbvp/boundary.hpp"
#include "mbvp/grid.hpp"

namespace mbvp {

/// -[phi(u')]' + u = h on [0, T] with (phi(u')(0), -phi(u')(T)) in gamma(u(0), u(T)).
struct LinearProblem {
    Mat h;  // (N + 1) x q nodal right-hand side
    BoundaryOperator bop;
    Grid grid;
};

struct LinearOptions {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 30;
    double lambda = 1.0;  // resolvent parameter used for the boundary closure
    bool continuation = true;
};

/// The solution operator S_gamma on the grid: trapezoidal collocation of
/// u' = phi^{-1}(w), w' = u - h closed by the boundary residual, solved by damped
/// Newton from `initial_guess` (zero when absent). On failure the solve is retried
/// by continuation s h, s = 0.25, 0.5, 0.75, 1. Throws NewtonDivergence.
GridFunction solve_S(const LinearProblem& problem, const LinearOptions& options = {},
                     const GridFunction* initial_guess = nullptr);

struct DiscreteResidual {
    double ode_res;  // infinity norm of the collocation defect
    double bc_res;   // infinity norm of the boundary residual
};

DiscreteResidual discrete_residual(const GridFunction& gf, const LinearProblem& problem, double lambda = 1.0);

/// Closed-form trajectory u* with its first two derivatives, used to build test problems.
struct ManufacturedSolution {
    std::function<Vec(double)> value;
    std::function<Vec(double)> derivative;
    std::function<Vec(double)> second_derivative;
};

struct ManufacturedData {
    Mat h;               // -d/dt phi(u*') + u* at the nodes
    GridFunction exact;  // (u*, phi(u*')) at the nodes
};

/// Throws DomainError when |u*'| reaches the light cone.
ManufacturedData manufactured_rhs(const ManufacturedSolution& solution, const Grid& grid);

struct ContinuityGap {
    double lhs;  // ||u1 - u2||^2_{H^1}
    double rhs;  // sqrt(T) ||h1 - h2||_inf ||u1 - u2||_{L^2}
};

/// Both sides of the continuity estimate for S_gamma evaluated on the grid.
ContinuityGap continuity_gap(const Mat& h1, const Mat& h2, const BoundaryOperator& bop, const Grid& grid,
                             const LinearOptions& options = {});

}  // namespace mbvp
