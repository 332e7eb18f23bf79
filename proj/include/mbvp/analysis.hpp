#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "mbvp/boundary.hpp"
#include "mbvp/field.hpp"
#include "mbvp/matrices.hpp"

namespace mbvp {

enum class Lambda1Method { Analytic, EigFD };

/// inf ||u'||^2 / ||u||^2 over nonzero u with (u(0), u(T)) in D(gamma).
/// For cone-type domains the quotient is scale invariant, so the |u'| <= 1
/// restriction of the admissible set does not change the infimum.
struct Lambda1Estimate {
    double value;
    Lambda1Method method;
    int grid_N;  // 0 for Analytic
};

/// Analytic zero when the domain contains the diagonal (constants are admissible);
/// otherwise the smallest eigenvalue of the finite-difference Rayleigh quotient with
/// the boundary subspace imposed on N subintervals. Throws Unsupported for ConvexSet.
Lambda1Estimate lambda1_estimate(const BoundaryOperator& op, double T, int N = 400);

/// Sampling domain for inequalities quantified over all of R^n x R^m.
struct SampleBox {
    double radius = 10.0;
    int samples = 10000;
    std::uint64_t seed = 24397;
};

/// Which inequality check_growth tests:
///   F1:     <f(t,x,y) | x> <= (a-1)|x|^2 + b|y|^2 + delta
///   F2:     <f(t,x,y) | y> <= c|x|^2 + (d-1)|y|^2 + delta
///   Scalar: <f(t,x) | x>   <= (a-1)|x|^2 + delta           (y is passed empty)
enum class GrowthRole { F1, F2, Scalar };

struct GrowthConstants {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double delta = 0.0;
};

struct GrowthWitness {
    double t = 0.0;
    Vec x;
    Vec y;
};

struct GrowthCheck {
    bool pass;
    double worst_violation;  // max over samples of lhs - rhs
    GrowthWitness witness;
};

/// Sampled certificate: t uniform in [0, T], x and y uniform in balls of radius R,
/// plus tail samples on the spheres of radius R. Passes iff the worst violation is <= 1e-9.
GrowthCheck check_growth(const VectorField& f, GrowthRole role, const GrowthConstants& constants,
                         const SampleBox& box, double T, int n, int m);

/// Smallest delta >= 0 for which the sampled inequality holds with the other constants fixed.
double sampled_delta(const VectorField& f, GrowthRole role, const GrowthConstants& constants, const SampleBox& box,
                     double T, int n, int m);

enum class TheoremCase { I, II, III, IV, None };
std::string_view case_name(TheoremCase c);

/// Certified growth constants: f1 carries (a, b, delta), f2 carries (c, d, delta).
struct GrowthHypotheses {
    std::optional<GrowthConstants> f1;
    std::optional<GrowthConstants> f2;
};

struct CaseSelection {
    TheoremCase which;
    double bound;                      // bound on ||u||_{H^1} + ||v||_{H^1}; infinity for None
    std::optional<AprioriBound> beta;  // componentwise squared bounds in case (iv)
};

/// First applicable case among (i)-(iv) with the bound from its a priori estimate.
/// None means existence is not certified, not that it fails.
CaseSelection select_case(const Lambda1Estimate& gamma_l1, const Lambda1Estimate& eta_l1,
                          const GrowthHypotheses& hypotheses, double T);

struct CoercivityConstants {
    double sigma;
    double rho;
    double k;
};

struct CoercivityResult {
    CoercivityConstants coercivity;
    GrowthConstants growth;  // a = 1 - sigma, delta = sigma rho^2 + k
};

/// Estimates (sigma, rho, k) for a scalar-role f with <f(t,x)|x> <= -sigma |x|^2 for |x| > rho,
/// scanning rho over {0, 1, 2, 4, ...} below R. Throws NotCoercive when no pair validates or
/// the resulting growth constants fail check_growth.
CoercivityResult coercivity_constants(const VectorField& f, const SampleBox& box, double T, int n);

}  // namespace mbvp
