#include "mbvp/linsolve.hpp"

#include <array>
#include <cmath>
#include <string>

#include "collocation.hpp"
#include "mbvp/errors.hpp"

namespace mbvp {

namespace {

void check_shapes(const LinearProblem& p) {
    if (p.h.rows() != p.grid.nodes() || p.h.cols() != p.bop.dim()) {
        throw InvalidParams("linear problem: right-hand side must be (N+1) x q");
    }
    if (!p.h.allFinite()) {
        throw InvalidParams("linear problem: right-hand side has non-finite values");
    }
}

detail::NewtonOutcome run_newton(const LinearProblem& p, const Mat& h, const LinearOptions& opts, Eigen::VectorXd& x) {
    const detail::Block block{p.bop.dim(), p.grid.nodes(), 0};
    const auto residual = [&](const Eigen::VectorXd& state, Eigen::VectorXd& out) {
        detail::component_residual(p.grid, p.bop, opts.lambda, detail::unpack(state, block), h, block, out);
    };
    const auto jacobian = [&](const Eigen::VectorXd& state, detail::Triplets& triplets) {
        detail::component_jacobian(p.grid, p.bop, opts.lambda, detail::unpack(state, block), block, triplets);
    };
    return detail::damped_newton(x, residual, jacobian, {opts.tol, opts.max_iter, opts.max_halvings});
}

}  // namespace

GridFunction solve_S(const LinearProblem& p, const LinearOptions& opts, const GridFunction* initial_guess) {
    check_shapes(p);
    const detail::Block block{p.bop.dim(), p.grid.nodes(), 0};

    Eigen::VectorXd x = Eigen::VectorXd::Zero(block.size());
    if (initial_guess != nullptr) {
        detail::pack(*initial_guess, block, x);
    }
    auto outcome = run_newton(p, p.h, opts, x);
    if (outcome.converged) {
        return detail::unpack(x, block);
    }

    double best = outcome.residual_inf;
    if (opts.continuation) {
        x.setZero();
        bool ok = true;
        for (const double s : std::array{0.25, 0.5, 0.75, 1.0}) {
            outcome = run_newton(p, s * p.h, opts, x);
            if (!outcome.converged) {
                ok = false;
                best = std::min(best, outcome.residual_inf);
                break;
            }
        }
        if (ok) {
            return detail::unpack(x, block);
        }
    }
    throw NewtonDivergence("solve_S: Newton did not reach tolerance (best residual " + std::to_string(best) + ")",
                           best);
}

DiscreteResidual discrete_residual(const GridFunction& gf, const LinearProblem& p, double lambda) {
    check_shapes(p);
    const detail::Block block{p.bop.dim(), p.grid.nodes(), 0};
    Eigen::VectorXd rows(block.size());
    detail::component_residual(p.grid, p.bop, lambda, gf, p.h, block, rows);
    const auto norms = detail::block_norms(rows, block);
    return {norms.ode, norms.bc};
}

ManufacturedData manufactured_rhs(const ManufacturedSolution& sol, const Grid& grid) {
    const Vec probe = sol.value(0.0);
    const auto q = probe.size();
    ManufacturedData data{Mat(grid.nodes(), q), GridFunction{Mat(grid.nodes(), q), Mat(grid.nodes(), q)}};
    for (int i = 0; i < grid.nodes(); ++i) {
        const double t = grid.node(i);
        const Vec u = sol.value(t);
        const Vec du = sol.derivative(t);
        const Vec d2u = sol.second_derivative(t);
        // -d/dt phi(u') = -Dphi(u') u''
        data.h.row(i) = (u - phi_jacobian(du) * d2u).transpose();
        data.exact.u.row(i) = u.transpose();
        data.exact.w.row(i) = phi(du).transpose();
    }
    return data;
}

ContinuityGap continuity_gap(const Mat& h1, const Mat& h2, const BoundaryOperator& bop, const Grid& grid,
                             const LinearOptions& opts) {
    const GridFunction u1 = solve_S({h1, bop, grid}, opts);
    const GridFunction u2 = solve_S({h2, bop, grid}, opts);
    const double lhs = h1_distance_squared(grid, u1, u2);
    const double sup_h = (h1 - h2).cwiseAbs().maxCoeff();
    const double l2_u = std::sqrt(l2_norm_squared(grid, u1.u - u2.u));
    return {lhs, std::sqrt(grid.T()) * sup_h * l2_u};
}

}  // namespace mbvp
