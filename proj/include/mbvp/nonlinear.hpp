#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mbvp/analysis.hpp"
#include "mbvp/boundary.hpp"
#include "mbvp/field.hpp"
#include "mbvp/grid.hpp"
#include "mbvp/linsolve.hpp"

namespace mbvp {

/// -[phi_n(u')]' = f1(t,u,v), -[phi_m(v')]' = f2(t,u,v) on [0, T] with
/// (phi(u')(0), -phi(u')(T)) in gamma(u(0), u(T)) and the same for v with eta.
struct SystemProblem {
    double T;
    int n;
    int m;
    VectorField f1;
    VectorField f2;
    BoundaryOperator gamma;
    BoundaryOperator eta;
};

struct SystemState {
    GridFunction u;
    GridFunction v;

    static SystemState zeros(const Grid& grid, int n, int m);
};

enum class Strategy { FixedPoint, Newton, Continuation };
std::string_view strategy_name(Strategy s);

/// Restricts the strategy ladder; Auto runs fixed point, then Newton, then continuation.
enum class StrategyChoice { Auto, FixedPointOnly, NewtonOnly, ContinuationOnly };

struct SolveOptions {
    int N = 200;
    double tol = 1e-8;
    double theta = 0.5;  // relaxation of the fixed-point iteration
    int max_fp_iter = 500;
    double fp_step_tol = 1e-9;
    int max_newton_iter = 50;
    int max_halvings = 30;
    int continuation_stages = 10;
    double lambda = 1.0;  // resolvent parameter
    LinearOptions linear;
    StrategyChoice strategy = StrategyChoice::Auto;
    std::optional<SystemState> initial_guess;  // on the solve grid
    std::uint64_t seed = 24397;
};

struct SolutionNorms {
    double u_h1;
    double v_h1;
    double total;  // ||(u, v)||_H = ||u||_{H^1} + ||v||_{H^1}
};

struct BoundCheck {
    TheoremCase which;
    double bound;
    bool satisfied;
};

/// One stage of the homotopy (u, v) = s Q(u, v); norms are of the homotopy solution.
struct StageRecord {
    double s;
    double u_h1_sq;
    double v_h1_sq;
    double residual;
};

struct SolveReport {
    Grid grid;
    SystemState state;
    double ode_res;
    double bc_res;
    int iterations;
    Strategy strategy;
    SolutionNorms norms;
    std::optional<BoundCheck> bound_check;
    std::vector<StageRecord> stages;
    std::uint64_t seed;
};

/// Nodal values of g1 = f1 + x (which = 1) or g2 = f2 + y (which = 2); (N+1) x n or m.
Mat nemytskii_g(int which, const SystemProblem& problem, const Grid& grid, const SystemState& state);

/// Q(u, v) = (S_gamma(N_g1(u, v)), S_eta(N_g2(u, v))). Warm-starts each linear
/// solve from the corresponding component of `state`.
SystemState apply_Q(const SystemProblem& problem, const Grid& grid, const SystemState& state,
                    const LinearOptions& options = {});

struct SystemResidual {
    double ode_res;
    double bc_res;
};

/// Collocation and boundary residuals of the coupled discrete system at `state`.
SystemResidual system_residual(const SystemProblem& problem, const Grid& grid, const SystemState& state,
                               double lambda = 1.0);

SolutionNorms solution_norms(const Grid& grid, const SystemState& state);

/// Fixed-point iteration, then monolithic Newton, then continuation in the homotopy
/// parameter. Throws NoConvergence when all strategies are exhausted.
SolveReport solve_system(const SystemProblem& problem, const SolveOptions& options = {});

struct VerifyOptions {
    double tol = 1e-8;
    double slack = 0.05;  // relative allowance on the theoretical bound
    int lambda1_N = 400;
    double lambda = 1.0;
};

struct Checklist {
    bool residual_ok;
    bool velocity_ok;
    std::optional<bool> bound_ok;  // empty when no case of the existence theorem applies
    CaseSelection selection;
    Lambda1Estimate gamma_l1;
    Lambda1Estimate eta_l1;
};

/// Recomputes residuals and the velocity bound from the report's state and compares the
/// realized norms against the bound of the first applicable case.
Checklist verify_report(const SystemProblem& problem, const SolveReport& report,
                        const GrowthHypotheses& hypotheses = {}, const VerifyOptions& options = {});

}  // namespace mbvp
