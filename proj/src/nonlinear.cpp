#include "mbvp/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "collocation.hpp"
#include "mbvp/errors.hpp"

namespace mbvp {

namespace {

// Newton runs to this fraction of the requested tolerance so that the fixed-point
// defect of the returned state stays well inside 10 tol.
constexpr double kNewtonTarget = 1e-2;
constexpr int kStagnationWindow = 50;

struct CoupledLayout {
    detail::Block u;
    detail::Block v;

    CoupledLayout(const Grid& grid, int n, int m)
        : u{n, grid.nodes(), 0}, v{m, grid.nodes(), 2 * static_cast<Eigen::Index>(n) * grid.nodes()} {}

    Eigen::Index size() const { return u.size() + v.size(); }
};

void check_problem(const SystemProblem& p) {
    if (p.n < 1 || p.m < 1) {
        throw InvalidParams("system: dimensions n and m must be >= 1");
    }
    if (p.gamma.dim() != p.n || p.eta.dim() != p.m) {
        throw InvalidParams("system: boundary operator dimensions must match n and m");
    }
    if (!p.f1 || !p.f2) {
        throw InvalidParams("system: both nonlinearities must be set");
    }
}

Vec evaluate_field(const VectorField& f, double t, const Vec& x, const Vec& y, Eigen::Index expected,
                   const char* name) {
    Vec value = f(t, x, y);
    if (value.size() != expected) {
        throw InvalidParams(std::string(name) + " returned a vector of the wrong dimension");
    }
    if (!value.allFinite()) {
        throw EvalError(std::string(name) + " is not finite at t = " + std::to_string(t));
    }
    return value;
}

// g_which(t, s x, s y) at every node, for the homotopy parameter s.
Mat scaled_g(int which, const SystemProblem& p, const Grid& grid, const Mat& u, const Mat& v, double s) {
    const int dim = which == 1 ? p.n : p.m;
    Mat out(grid.nodes(), dim);
    for (int i = 0; i < grid.nodes(); ++i) {
        const Vec x = s * u.row(i).transpose();
        const Vec y = s * v.row(i).transpose();
        if (which == 1) {
            out.row(i) = (evaluate_field(p.f1, grid.node(i), x, y, p.n, "f1") + x).transpose();
        } else {
            out.row(i) = (evaluate_field(p.f2, grid.node(i), x, y, p.m, "f2") + y).transpose();
        }
    }
    return out;
}

void coupled_residual(const SystemProblem& p, const Grid& grid, const CoupledLayout& layout, double lambda,
                      double s, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    const GridFunction u = detail::unpack(x, layout.u);
    const GridFunction v = detail::unpack(x, layout.v);
    detail::component_residual(grid, p.gamma, lambda, u, scaled_g(1, p, grid, u.u, v.u, s), layout.u, out);
    detail::component_residual(grid, p.eta, lambda, v, scaled_g(2, p, grid, u.u, v.u, s), layout.v, out);
}

// Stacked (g1, g2) at one node, as a function of the stacked (x, y).
Vec stacked_g(const SystemProblem& p, double t, const Vec& z) {
    const Vec x = z.head(p.n);
    const Vec y = z.tail(p.m);
    Vec out(p.n + p.m);
    out << evaluate_field(p.f1, t, x, y, p.n, "f1") + x, evaluate_field(p.f2, t, x, y, p.m, "f2") + y;
    return out;
}

void coupled_jacobian(const SystemProblem& p, const Grid& grid, const CoupledLayout& layout, double lambda,
                      double s, const Eigen::VectorXd& x, detail::Triplets& triplets) {
    const GridFunction u = detail::unpack(x, layout.u);
    const GridFunction v = detail::unpack(x, layout.v);
    detail::component_jacobian(grid, p.gamma, lambda, u, layout.u, triplets);
    detail::component_jacobian(grid, p.eta, lambda, v, layout.v, triplets);

    // Nemytskii coupling: the w-defect rows carry +1/2 h at both interval ends,
    // with h = g(t, s u, s v); derivatives by forward differences.
    const int dim = p.n + p.m;
    Vec z(dim);
    for (int i = 0; i < grid.nodes(); ++i) {
        const double t = grid.node(i);
        z << s * u.u.row(i).transpose(), s * v.u.row(i).transpose();
        const Vec base = stacked_g(p, t, z);
        Mat dg(dim, dim);
        for (int j = 0; j < dim; ++j) {
            const double step = 1e-7 * (1.0 + std::abs(z[j]));
            const double saved = z[j];
            z[j] = saved + step;
            dg.col(j) = (stacked_g(p, t, z) - base) / step;
            z[j] = saved;
        }
        dg *= 0.5 * s;

        const auto column = [&](int j) {
            return j < p.n ? layout.u.u_index(i, j) : layout.v.u_index(i, j - p.n);
        };
        for (int interval : {i - 1, i}) {
            if (interval < 0 || interval >= grid.N()) continue;
            for (int r = 0; r < dim; ++r) {
                const auto row = r < p.n ? layout.u.w_row(interval, r) : layout.v.w_row(interval, r - p.n);
                for (int j = 0; j < dim; ++j) {
                    if (dg(r, j) != 0.0) triplets.emplace_back(row, column(j), dg(r, j));
                }
            }
        }
    }
}

Eigen::VectorXd pack_state(const SystemState& state, const CoupledLayout& layout) {
    Eigen::VectorXd x(layout.size());
    detail::pack(state.u, layout.u, x);
    detail::pack(state.v, layout.v, x);
    return x;
}

SystemState unpack_state(const Eigen::VectorXd& x, const CoupledLayout& layout) {
    return {detail::unpack(x, layout.u), detail::unpack(x, layout.v)};
}

struct Attempt {
    bool converged;
    int iterations;
    double residual;
};

// Monolithic Newton for the homotopy stage s (s = 1 is the original system).
Attempt coupled_newton(const SystemProblem& p, const Grid& grid, const SolveOptions& opts, double s,
                       Eigen::VectorXd& x) {
    const CoupledLayout layout(grid, p.n, p.m);
    const auto residual = [&](const Eigen::VectorXd& state, Eigen::VectorXd& out) {
        coupled_residual(p, grid, layout, opts.lambda, s, state, out);
    };
    const auto jacobian = [&](const Eigen::VectorXd& state, detail::Triplets& triplets) {
        coupled_jacobian(p, grid, layout, opts.lambda, s, state, triplets);
    };
    const auto outcome =
        detail::damped_newton(x, residual, jacobian, {kNewtonTarget * opts.tol, opts.max_newton_iter, opts.max_halvings});
    return {outcome.residual_inf <= opts.tol, outcome.iterations, outcome.residual_inf};
}

double sup_norm(const SystemState& s) {
    return std::max({s.u.u.cwiseAbs().maxCoeff(), s.u.w.cwiseAbs().maxCoeff(), s.v.u.cwiseAbs().maxCoeff(),
                     s.v.w.cwiseAbs().maxCoeff()});
}

double max_residual(const SystemResidual& r) {
    return std::max(r.ode_res, r.bc_res);
}

struct FixedPointOutcome {
    bool converged;
    int iterations;
    SystemState state;  // last Q output when converged, otherwise the best iterate
};

FixedPointOutcome fixed_point(const SystemProblem& p, const Grid& grid, const SolveOptions& opts,
                              SystemState state) {
    LinearOptions linear = opts.linear;
    linear.lambda = opts.lambda;
    SystemState best = state;
    double best_step = std::numeric_limits<double>::infinity();
    int since_best = 0;
    int it = 0;
    for (; it < opts.max_fp_iter; ++it) {
        SystemState image;
        try {
            image = apply_Q(p, grid, state, linear);
        } catch (const Error&) {
            break;
        }
        const double diff = std::max(sup_distance(image.u, state.u), sup_distance(image.v, state.v));
        if (!std::isfinite(diff)) break;

        const double step = opts.theta * diff;
        state.u.u += opts.theta * (image.u.u - state.u.u);
        state.u.w += opts.theta * (image.u.w - state.u.w);
        state.v.u += opts.theta * (image.v.u - state.v.u);
        state.v.w += opts.theta * (image.v.w - state.v.w);

        if (step < opts.fp_step_tol * (1.0 + sup_norm(state))) {
            return {true, it + 1, std::move(image)};
        }
        if (step < best_step) {
            best_step = step;
            best = state;
            since_best = 0;
        } else if (++since_best > kStagnationWindow) {
            ++it;
            break;
        }
    }
    return {false, it, std::move(best)};
}

SolveReport make_report(const SystemProblem& p, const Grid& grid, SystemState state, int iterations,
                        Strategy strategy, const SolveOptions& opts) {
    const auto res = system_residual(p, grid, state, opts.lambda);
    const auto norms = solution_norms(grid, state);
    return SolveReport{grid, std::move(state), res.ode_res, res.bc_res, iterations, strategy, norms, std::nullopt,
                       {}, opts.seed};
}

}  // namespace

SystemState SystemState::zeros(const Grid& grid, int n, int m) {
    return {GridFunction::zeros(grid, n), GridFunction::zeros(grid, m)};
}

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::FixedPoint: return "fixed_point";
        case Strategy::Newton: return "newton";
        case Strategy::Continuation: return "continuation";
    }
    return "unknown";
}

Mat nemytskii_g(int which, const SystemProblem& p, const Grid& grid, const SystemState& state) {
    if (which != 1 && which != 2) {
        throw InvalidParams("nemytskii_g: component must be 1 or 2");
    }
    check_problem(p);
    return scaled_g(which, p, grid, state.u.u, state.v.u, 1.0);
}

SystemState apply_Q(const SystemProblem& p, const Grid& grid, const SystemState& state, const LinearOptions& opts) {
    check_problem(p);
    const LinearProblem first{nemytskii_g(1, p, grid, state), p.gamma, grid};
    const LinearProblem second{nemytskii_g(2, p, grid, state), p.eta, grid};
    return {solve_S(first, opts, &state.u), solve_S(second, opts, &state.v)};
}

SystemResidual system_residual(const SystemProblem& p, const Grid& grid, const SystemState& state, double lambda) {
    check_problem(p);
    const CoupledLayout layout(grid, p.n, p.m);
    const Eigen::VectorXd x = pack_state(state, layout);
    Eigen::VectorXd rows(layout.size());
    coupled_residual(p, grid, layout, lambda, 1.0, x, rows);
    const auto ru = detail::block_norms(rows, layout.u);
    const auto rv = detail::block_norms(rows, layout.v);
    return {std::max(ru.ode, rv.ode), std::max(ru.bc, rv.bc)};
}

SolutionNorms solution_norms(const Grid& grid, const SystemState& state) {
    const double u = h1_norm(grid, state.u);
    const double v = h1_norm(grid, state.v);
    return {u, v, u + v};
}

SolveReport solve_system(const SystemProblem& p, const SolveOptions& opts) {
    check_problem(p);
    const Grid grid(p.T, opts.N);
    const CoupledLayout layout(grid, p.n, p.m);
    const auto choice = opts.strategy;
    const auto use = [choice](StrategyChoice c) { return choice == StrategyChoice::Auto || choice == c; };

    SystemState start = opts.initial_guess ? *opts.initial_guess : SystemState::zeros(grid, p.n, p.m);
    if (start.u.nodes() != grid.nodes() || start.v.nodes() != grid.nodes() || start.u.dim() != p.n ||
        start.v.dim() != p.m) {
        throw InvalidParams("solve_system: initial guess does not match the grid and dimensions");
    }
    int iterations = 0;
    double best_residual = std::numeric_limits<double>::infinity();

    if (use(StrategyChoice::FixedPointOnly)) {
        auto fp = fixed_point(p, grid, opts, start);
        iterations += fp.iterations;
        double residual = std::numeric_limits<double>::infinity();
        try {
            residual = max_residual(system_residual(p, grid, fp.state, opts.lambda));
        } catch (const Error&) {
        }
        best_residual = std::min(best_residual, residual);
        if (fp.converged && residual <= opts.tol) {
            return make_report(p, grid, std::move(fp.state), iterations, Strategy::FixedPoint, opts);
        }
        if (std::isfinite(residual)) {
            start = std::move(fp.state);
        }
    }

    if (use(StrategyChoice::NewtonOnly)) {
        Eigen::VectorXd x = pack_state(start, layout);
        const auto attempt = coupled_newton(p, grid, opts, 1.0, x);
        iterations += attempt.iterations;
        best_residual = std::min(best_residual, attempt.residual);
        if (attempt.converged) {
            return make_report(p, grid, unpack_state(x, layout), iterations, Strategy::Newton, opts);
        }
    }

    if (use(StrategyChoice::ContinuationOnly)) {
        Eigen::VectorXd x = opts.initial_guess ? pack_state(*opts.initial_guess, layout)
                                               : Eigen::VectorXd::Zero(layout.size());
        std::vector<StageRecord> stages;
        bool ok = true;
        for (int k = 1; k <= opts.continuation_stages; ++k) {
            const double s = static_cast<double>(k) / opts.continuation_stages;
            const auto attempt = coupled_newton(p, grid, opts, s, x);
            iterations += attempt.iterations;
            if (!attempt.converged) {
                best_residual = std::min(best_residual, attempt.residual);
                ok = false;
                break;
            }
            // The homotopy solution is s times the stage unknowns.
            const double h1_sq_u = s * s * h1_norm_squared(grid, detail::unpack(x, layout.u));
            const double h1_sq_v = s * s * h1_norm_squared(grid, detail::unpack(x, layout.v));
            stages.push_back({s, h1_sq_u, h1_sq_v, attempt.residual});
        }
        if (ok) {
            auto report = make_report(p, grid, unpack_state(x, layout), iterations, Strategy::Continuation, opts);
            report.stages = std::move(stages);
            return report;
        }
    }

    throw NoConvergence("solve_system: all strategies exhausted (best residual " + std::to_string(best_residual) +
                            ")",
                        best_residual);
}

Checklist verify_report(const SystemProblem& p, const SolveReport& report, const GrowthHypotheses& hypotheses,
                        const VerifyOptions& opts) {
    const auto& grid = report.grid;
    bool residual_ok = false;
    try {
        const auto res = system_residual(p, grid, report.state, opts.lambda);
        residual_ok = max_residual(res) <= opts.tol;
    } catch (const Error&) {
    }
    const bool velocity_ok = report.state.u.max_speed() < 1.0 && report.state.v.max_speed() < 1.0;

    // Domains without a cone description cannot certify lambda1 > 0; they count as zero.
    const auto estimate = [&](const BoundaryOperator& op) {
        try {
            return lambda1_estimate(op, p.T, opts.lambda1_N);
        } catch (const Unsupported&) {
            return Lambda1Estimate{0.0, Lambda1Method::Analytic, 0};
        }
    };
    const auto gamma_l1 = estimate(p.gamma);
    const auto eta_l1 = estimate(p.eta);
    const auto selection = select_case(gamma_l1, eta_l1, hypotheses, p.T);

    std::optional<bool> bound_ok;
    if (selection.which != TheoremCase::None) {
        const double allowance = 1.0 + opts.slack;
        const auto norms = solution_norms(grid, report.state);
        bool ok = norms.total <= selection.bound * allowance;
        if (selection.beta) {
            ok = ok && h1_norm_squared(grid, report.state.u) <= selection.beta->beta_u * allowance &&
                 h1_norm_squared(grid, report.state.v) <= selection.beta->beta_v * allowance;
        }
        bound_ok = ok;
    }
    return {residual_ok, velocity_ok, bound_ok, selection, gamma_l1, eta_l1};
}

}  // namespace mbvp
