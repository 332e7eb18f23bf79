#include "collocation.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "mbvp/errors.hpp"

namespace mbvp::detail {

namespace {

constexpr double kArmijo = 1e-4;

Vec boundary_position(const GridFunction& gf) {
    Vec p(2 * gf.dim());
    p << gf.u.row(0).transpose(), gf.u.row(gf.nodes() - 1).transpose();
    return p;
}

Vec boundary_flux(const GridFunction& gf) {
    Vec f(2 * gf.dim());
    f << gf.w.row(0).transpose(), -gf.w.row(gf.nodes() - 1).transpose();
    return f;
}

// Forward-difference derivative of the resolvent; exact up to rounding for the
// piecewise-linear catalog resolvents away from kinks.
Mat resolvent_jacobian(const BoundaryOperator& op, double lambda, const Vec& y) {
    const auto dim = y.size();
    const double h = 1e-7 * (1.0 + y.norm());
    const Vec base = op.resolvent(lambda, y);
    Mat jac(dim, dim);
    Vec shifted = y;
    for (Eigen::Index k = 0; k < dim; ++k) {
        shifted[k] = y[k] + h;
        jac.col(k) = (op.resolvent(lambda, shifted) - base) / h;
        shifted[k] = y[k];
    }
    return jac;
}

bool evaluate(const ResidualFn& residual, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    try {
        residual(x, out);
    } catch (const EvalError&) {
        return false;
    } catch (const DomainError&) {
        return false;
    }
    return out.allFinite();
}

}  // namespace

GridFunction unpack(const Eigen::VectorXd& x, const Block& block) {
    GridFunction gf{Mat(block.nodes, block.q), Mat(block.nodes, block.q)};
    for (int i = 0; i < block.nodes; ++i) {
        for (int k = 0; k < block.q; ++k) {
            gf.u(i, k) = x[block.u_index(i, k)];
            gf.w(i, k) = x[block.w_index(i, k)];
        }
    }
    return gf;
}

void pack(const GridFunction& gf, const Block& block, Eigen::VectorXd& x) {
    for (int i = 0; i < block.nodes; ++i) {
        for (int k = 0; k < block.q; ++k) {
            x[block.u_index(i, k)] = gf.u(i, k);
            x[block.w_index(i, k)] = gf.w(i, k);
        }
    }
}

void component_residual(const Grid& grid, const BoundaryOperator& op, double lambda, const GridFunction& gf,
                        const Mat& h, const Block& block, Eigen::VectorXd& out) {
    const int q = block.q;
    const double inv_step = 1.0 / grid.step();

    const Vec bc = boundary_residual(op, lambda, {boundary_position(gf), boundary_flux(gf)});
    for (int k = 0; k < 2 * q; ++k) out[block.bc_row(k)] = bc[k];

    Vec speed_left = phi_inverse(gf.w.row(0).transpose());
    for (int i = 0; i < grid.N(); ++i) {
        const Vec speed_right = phi_inverse(gf.w.row(i + 1).transpose());
        for (int k = 0; k < q; ++k) {
            out[block.u_row(i, k)] =
                (gf.u(i + 1, k) - gf.u(i, k)) * inv_step - 0.5 * (speed_left[k] + speed_right[k]);
            out[block.w_row(i, k)] = (gf.w(i + 1, k) - gf.w(i, k)) * inv_step -
                                     0.5 * ((gf.u(i, k) - h(i, k)) + (gf.u(i + 1, k) - h(i + 1, k)));
        }
        speed_left = speed_right;
    }
}

void component_jacobian(const Grid& grid, const BoundaryOperator& op, double lambda, const GridFunction& gf,
                        const Block& block, Triplets& triplets) {
    const int q = block.q;
    const int last = grid.N();
    const double inv_step = 1.0 / grid.step();

    // Boundary rows: R = p - J(p + lambda f), p = (u_0, u_N), f = (w_0, -w_N).
    const Vec y = boundary_position(gf) + lambda * boundary_flux(gf);
    const Mat dj = resolvent_jacobian(op, lambda, y);
    for (int r = 0; r < 2 * q; ++r) {
        for (int k = 0; k < q; ++k) {
            const double pos0 = (r == k ? 1.0 : 0.0) - dj(r, k);
            const double posT = (r == q + k ? 1.0 : 0.0) - dj(r, q + k);
            if (pos0 != 0.0) triplets.emplace_back(block.bc_row(r), block.u_index(0, k), pos0);
            if (posT != 0.0) triplets.emplace_back(block.bc_row(r), block.u_index(last, k), posT);
            const double flux0 = -lambda * dj(r, k);
            const double fluxT = lambda * dj(r, q + k);
            if (flux0 != 0.0) triplets.emplace_back(block.bc_row(r), block.w_index(0, k), flux0);
            if (fluxT != 0.0) triplets.emplace_back(block.bc_row(r), block.w_index(last, k), fluxT);
        }
    }

    Mat dspeed_left = phi_inverse_jacobian(gf.w.row(0).transpose());
    for (int i = 0; i < grid.N(); ++i) {
        const Mat dspeed_right = phi_inverse_jacobian(gf.w.row(i + 1).transpose());
        for (int k = 0; k < q; ++k) {
            const auto ur = block.u_row(i, k);
            triplets.emplace_back(ur, block.u_index(i + 1, k), inv_step);
            triplets.emplace_back(ur, block.u_index(i, k), -inv_step);
            for (int j = 0; j < q; ++j) {
                triplets.emplace_back(ur, block.w_index(i, j), -0.5 * dspeed_left(k, j));
                triplets.emplace_back(ur, block.w_index(i + 1, j), -0.5 * dspeed_right(k, j));
            }
            const auto wr = block.w_row(i, k);
            triplets.emplace_back(wr, block.w_index(i + 1, k), inv_step);
            triplets.emplace_back(wr, block.w_index(i, k), -inv_step);
            triplets.emplace_back(wr, block.u_index(i, k), -0.5);
            triplets.emplace_back(wr, block.u_index(i + 1, k), -0.5);
        }
        dspeed_left = dspeed_right;
    }
}

ResidualNorms block_norms(const Eigen::VectorXd& residual, const Block& block) {
    const auto bc_rows = 2 * static_cast<Eigen::Index>(block.q);
    const auto all = residual.segment(block.offset, block.size());
    return {all.tail(block.size() - bc_rows).cwiseAbs().maxCoeff(), all.head(bc_rows).cwiseAbs().maxCoeff()};
}

NewtonOutcome damped_newton(Eigen::VectorXd& x, const ResidualFn& residual, const JacobianFn& jacobian,
                            const NewtonSettings& settings) {
    const auto n = x.size();
    Eigen::VectorXd f(n);
    if (!evaluate(residual, x, f)) {
        return {false, 0, std::numeric_limits<double>::infinity()};
    }
    double norm2 = f.norm();
    double norm_inf = f.cwiseAbs().maxCoeff();

    Triplets triplets;
    Eigen::SparseMatrix<double> jac(n, n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    Eigen::VectorXd trial(n);
    Eigen::VectorXd f_trial(n);

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        if (norm_inf <= settings.tol) {
            return {true, iter, norm_inf};
        }
        triplets.clear();
        jacobian(x, triplets);
        jac.setFromTriplets(triplets.begin(), triplets.end());
        lu.compute(jac);
        if (lu.info() != Eigen::Success) {
            return {false, iter, norm_inf};
        }
        const Eigen::VectorXd delta = lu.solve(-f);
        if (!delta.allFinite()) {
            return {false, iter, norm_inf};
        }

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= settings.max_halvings; ++halving) {
            trial = x + alpha * delta;
            if (evaluate(residual, trial, f_trial) && f_trial.norm() <= (1.0 - kArmijo * alpha) * norm2) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            return {false, iter + 1, norm_inf};
        }
        x.swap(trial);
        f.swap(f_trial);
        norm2 = f.norm();
        norm_inf = f.cwiseAbs().maxCoeff();
    }
    return {norm_inf <= settings.tol, settings.max_iter, norm_inf};
}

}  // namespace mbvp::detail
