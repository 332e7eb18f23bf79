#include "mbvp/analysis.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mbvp/errors.hpp"

namespace mbvp {

namespace {

constexpr double kGrowthTolerance = 1e-9;
constexpr double kSigmaTie = 1e-12;

// Admissible (u(0), u(T)) for one scalar component, as columns of a 2 x k basis.
Eigen::MatrixXd boundary_subspace(DomainDescriptor domain) {
    switch (domain) {
        case DomainDescriptor::SinglePoint0:
            return Eigen::MatrixXd(2, 0);
        case DomainDescriptor::Antidiagonal:
            return (Eigen::MatrixXd(2, 1) << 1.0, -1.0).finished();
        case DomainDescriptor::Diagonal:
            return (Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished();
        case DomainDescriptor::FullSpace:
            return Eigen::MatrixXd::Identity(2, 2);
        case DomainDescriptor::ConvexSet:
            break;
    }
    throw Unsupported("lambda1: no subspace description for a general convex domain");
}

// Smallest eigenvalue of K x = lambda M x for the piecewise-linear stiffness K and the
// trapezoidal (lumped) mass M, restricted to nodal vectors whose end values lie in the
// boundary subspace. Inverse iteration on the symmetrically scaled operator.
double smallest_fd_eigenvalue(const Eigen::MatrixXd& basis, double T, int N) {
    using Sparse = Eigen::SparseMatrix<double>;
    const double h = T / N;
    const int interior = N - 1;
    const int k = static_cast<int>(basis.cols());
    const int dim = interior + k;

    // P maps reduced coordinates to nodal values u_0..u_N.
    std::vector<Eigen::Triplet<double>> pt;
    for (int i = 1; i <= interior; ++i) pt.emplace_back(i, i - 1, 1.0);
    for (int c = 0; c < k; ++c) {
        if (basis(0, c) != 0.0) pt.emplace_back(0, interior + c, basis(0, c));
        if (basis(1, c) != 0.0) pt.emplace_back(N, interior + c, basis(1, c));
    }
    Sparse P(N + 1, dim);
    P.setFromTriplets(pt.begin(), pt.end());

    std::vector<Eigen::Triplet<double>> kt;
    Eigen::VectorXd mass = Eigen::VectorXd::Constant(N + 1, h);
    mass(0) = mass(N) = 0.5 * h;
    for (int i = 0; i < N; ++i) {
        kt.emplace_back(i, i, 1.0 / h);
        kt.emplace_back(i + 1, i + 1, 1.0 / h);
        kt.emplace_back(i, i + 1, -1.0 / h);
        kt.emplace_back(i + 1, i, -1.0 / h);
    }
    Sparse K(N + 1, N + 1);
    K.setFromTriplets(kt.begin(), kt.end());

    const Sparse reduced_k = P.transpose() * K * P;
    const Eigen::VectorXd reduced_m = P.transpose().cwiseAbs2() * mass;
    const Eigen::VectorXd scale = reduced_m.cwiseSqrt().cwiseInverse();
    const Sparse A = scale.asDiagonal() * reduced_k * scale.asDiagonal();

    Eigen::SimplicialLDLT<Sparse> ldlt(A);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 1e-14 * A.diagonal().maxCoeff()).any()) {
        return 0.0;  // constants (or another null vector) are admissible
    }

    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(dim, 1.0, 2.0);
    x.normalize();
    double rayleigh = x.dot(A * x);
    for (int iter = 0; iter < 2000; ++iter) {
        x = ldlt.solve(x);
        x.normalize();
        const double next = x.dot(A * x);
        if (std::abs(next - rayleigh) <= 1e-15 * next) {
            return next;
        }
        rayleigh = next;
    }
    return rayleigh;
}

struct Sample {
    double t;
    Vec x;
    Vec y;
};

Vec uniform_in_ball(std::mt19937_64& rng, int dim, double radius, bool on_sphere) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vec v(dim);
    if (dim == 0) return v;
    double norm = 0.0;
    while (norm == 0.0) {
        for (int k = 0; k < dim; ++k) v[k] = normal(rng);
        norm = v.norm();
    }
    const double r = on_sphere ? radius : radius * std::pow(uniform(rng), 1.0 / dim);
    return v * (r / norm);
}

// Every tenth sample puts x on the outer sphere, every tenth-plus-one puts y there.
std::vector<Sample> draw_samples(const SampleBox& box, double T, int n, int m) {
    if (!(box.radius > 0.0) || box.samples < 1000) {
        throw InvalidParams("sample box requires radius > 0 and at least 1000 samples");
    }
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> time(0.0, T);
    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(box.samples));
    for (int s = 0; s < box.samples; ++s) {
        const double t = time(rng);
        Vec x = uniform_in_ball(rng, n, box.radius, s % 10 == 0);
        Vec y = uniform_in_ball(rng, m, box.radius, s % 10 == 1);
        out.push_back({t, std::move(x), std::move(y)});
    }
    return out;
}

double checked_dot(const VectorField& f, const Sample& s, const Vec& against, Eigen::Index expected) {
    const Vec value = f(s.t, s.x, s.y);
    if (value.size() != expected) {
        throw InvalidParams("growth check: nonlinearity returned a vector of the wrong dimension");
    }
    if (!value.allFinite()) {
        throw EvalError("growth check: nonlinearity is not finite at a sample point");
    }
    return value.dot(against);
}

// lhs - rhs of the role's inequality without the delta term.
double violation(const VectorField& f, GrowthRole role, const GrowthConstants& gc, const Sample& s) {
    const double x2 = s.x.squaredNorm();
    const double y2 = s.y.squaredNorm();
    switch (role) {
        case GrowthRole::F1:
            return checked_dot(f, s, s.x, s.x.size()) - ((gc.a - 1.0) * x2 + gc.b * y2);
        case GrowthRole::F2:
            return checked_dot(f, s, s.y, s.y.size()) - (gc.c * x2 + (gc.d - 1.0) * y2);
        case GrowthRole::Scalar:
            return checked_dot(f, s, s.x, s.x.size()) - (gc.a - 1.0) * x2;
    }
    return 0.0;
}

GrowthCheck worst_sample(const VectorField& f, GrowthRole role, const GrowthConstants& gc, const SampleBox& box,
                         double T, int n, int m) {
    const int y_dim = role == GrowthRole::Scalar ? 0 : m;
    const auto samples = draw_samples(box, T, n, y_dim);
    GrowthCheck result{true, -std::numeric_limits<double>::infinity(), {}};
    for (const auto& s : samples) {
        const double v = violation(f, role, gc, s) - gc.delta;
        if (v > result.worst_violation) {
            result.worst_violation = v;
            result.witness = {s.t, s.x, s.y};
        }
    }
    result.pass = result.worst_violation <= kGrowthTolerance;
    return result;
}

double sqrt_or_inf(double v) {
    return std::isfinite(v) ? std::sqrt(v) : std::numeric_limits<double>::infinity();
}

}  // namespace

Lambda1Estimate lambda1_estimate(const BoundaryOperator& op, double T, int N) {
    if (!(T > 0.0) || N < 2) {
        throw InvalidParams("lambda1: requires T > 0 and N >= 2");
    }
    const auto domain = op.domain();
    if (domain == DomainDescriptor::ConvexSet) {
        throw Unsupported("lambda1: only cone-type boundary domains are supported");
    }
    if (domain == DomainDescriptor::FullSpace || domain == DomainDescriptor::Diagonal) {
        return {0.0, Lambda1Method::Analytic, 0};
    }
    return {smallest_fd_eigenvalue(boundary_subspace(domain), T, N), Lambda1Method::EigFD, N};
}

GrowthCheck check_growth(const VectorField& f, GrowthRole role, const GrowthConstants& constants,
                         const SampleBox& box, double T, int n, int m) {
    return worst_sample(f, role, constants, box, T, n, m);
}

double sampled_delta(const VectorField& f, GrowthRole role, const GrowthConstants& constants, const SampleBox& box,
                     double T, int n, int m) {
    GrowthConstants without = constants;
    without.delta = 0.0;
    return std::max(0.0, worst_sample(f, role, without, box, T, n, m).worst_violation);
}

std::string_view case_name(TheoremCase c) {
    switch (c) {
        case TheoremCase::I: return "i";
        case TheoremCase::II: return "ii";
        case TheoremCase::III: return "iii";
        case TheoremCase::IV: return "iv";
        case TheoremCase::None: return "none";
    }
    return "none";
}

CaseSelection select_case(const Lambda1Estimate& gamma_l1, const Lambda1Estimate& eta_l1,
                          const GrowthHypotheses& hyp, double T) {
    const double lg = gamma_l1.value;
    const double le = eta_l1.value;
    const auto free_bound = [T](double l1) { return std::sqrt(T + T / l1); };

    if (lg > 0.0 && le > 0.0) {
        return {TheoremCase::I, free_bound(lg) + free_bound(le), std::nullopt};
    }
    const auto f1_ok = hyp.f1 && hyp.f1->a >= 0.0 && hyp.f1->b >= 0.0 && hyp.f1->delta >= 0.0;
    const auto f2_ok = hyp.f2 && hyp.f2->c >= 0.0 && hyp.f2->d >= 0.0 && hyp.f2->delta >= 0.0;
    if (le > 0.0 && f1_ok && hyp.f1->a < 1.0) {
        const double k1 = (hyp.f1->b / le + hyp.f1->delta) * T;
        return {TheoremCase::II, std::sqrt(k1 / (1.0 - hyp.f1->a)) + free_bound(le), std::nullopt};
    }
    if (lg > 0.0 && f2_ok && hyp.f2->d < 1.0) {
        const double k2 = (hyp.f2->c / lg + hyp.f2->delta) * T;
        return {TheoremCase::III, free_bound(lg) + std::sqrt(k2 / (1.0 - hyp.f2->d)), std::nullopt};
    }
    if (f1_ok && f2_ok) {
        const ConvMatrix m(hyp.f1->a, hyp.f1->b, hyp.f2->c, hyp.f2->d);
        if (is_convergent_to_zero(m).convergent) {
            const auto beta = apriori_bound_iv(m, std::max(hyp.f1->delta, hyp.f2->delta), T);
            return {TheoremCase::IV, sqrt_or_inf(beta.beta_u) + sqrt_or_inf(beta.beta_v), beta};
        }
    }
    return {TheoremCase::None, std::numeric_limits<double>::infinity(), std::nullopt};
}

CoercivityResult coercivity_constants(const VectorField& f, const SampleBox& box, double T, int n) {
    const auto tail = draw_samples(box, T, n, 0);

    std::vector<double> ladder{0.0};
    for (double r = 1.0; r < box.radius; r *= 2.0) ladder.push_back(r);

    double best_sigma = -std::numeric_limits<double>::infinity();
    double best_rho = 0.0;
    for (const double rho : ladder) {
        double sigma = 1.0;
        bool any = false;
        for (const auto& s : tail) {
            const double x2 = s.x.squaredNorm();
            if (!(std::sqrt(x2) > rho) || x2 == 0.0) continue;
            any = true;
            sigma = std::min(sigma, -checked_dot(f, s, s.x, n) / x2);
        }
        if (any && sigma > best_sigma + kSigmaTie) {
            best_sigma = sigma;
            best_rho = rho;
        }
    }
    if (!(best_sigma > 0.0)) {
        throw NotCoercive("coercivity: <f(t,x)|x> <= -sigma |x|^2 fails for every sigma > 0 on the tail samples");
    }

    // k = max |<f(t,x)|x>| over the closed rho-ball, sampled inside and on its sphere.
    // For rho = 0 the ball is {0}, where the product vanishes.
    double k = 0.0;
    if (best_rho > 0.0) {
        SampleBox inner = box;
        inner.radius = best_rho;
        for (const auto& s : draw_samples(inner, T, n, 0)) {
            k = std::max(k, std::abs(checked_dot(f, s, s.x, n)));
        }
    }

    CoercivityResult result{{best_sigma, best_rho, k}, {}};
    result.growth.a = 1.0 - best_sigma;
    result.growth.delta = best_sigma * best_rho * best_rho + k;
    const auto check = check_growth(f, GrowthRole::Scalar, result.growth, box, T, n, 0);
    if (!check.pass) {
        throw NotCoercive("coercivity: constructed constants fail the sampled growth check (violation " +
                          std::to_string(check.worst_violation) + ")");
    }
    return result;
}

}  // namespace mbvp
