#include <gtest/gtest.h>

#include <numbers>

#include "mbvp/analysis.hpp"
#include "mbvp/errors.hpp"
#include "oracles.hpp"

using mbvp::BoundaryKind;
using mbvp::GrowthRole;
using mbvp::Lambda1Estimate;
using mbvp::Lambda1Method;
using mbvp::TheoremCase;
using mbvp::Vec;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

Lambda1Estimate fd(double value) {
    return {value, Lambda1Method::EigFD, 400};
}

Lambda1Estimate zero() {
    return {0.0, Lambda1Method::Analytic, 0};
}

mbvp::GrowthConstants f1_constants(double a, double b, double delta) {
    mbvp::GrowthConstants c;
    c.a = a;
    c.b = b;
    c.delta = delta;
    return c;
}

mbvp::GrowthConstants f2_constants(double c_, double d, double delta) {
    mbvp::GrowthConstants c;
    c.c = c_;
    c.d = d;
    c.delta = delta;
    return c;
}

mbvp::SampleBox small_box() {
    mbvp::SampleBox box;
    box.samples = 4000;
    return box;
}

}  // namespace

TEST(Lambda1, AnalyticZeroWhenConstantsAreAdmissible) {
    for (auto kind : {BoundaryKind::Periodic, BoundaryKind::Neumann}) {
        const auto est = mbvp::lambda1_estimate(mbvp::build_boundary(kind, 1), 1.0);
        EXPECT_EQ(est.value, 0.0);
        EXPECT_EQ(est.method, Lambda1Method::Analytic);
    }
}

TEST(Lambda1, DirichletMatchesDiscreteOracles) {
    for (int N : {64, 400}) {
        const auto est = mbvp::lambda1_estimate(mbvp::build_boundary(BoundaryKind::Dirichlet, 1), 1.0, N);
        EXPECT_EQ(est.method, Lambda1Method::EigFD);
        EXPECT_EQ(est.grid_N, N);
        EXPECT_NEAR(est.value, oracle::discrete_dirichlet_lambda1(1.0, N), 1e-8 * est.value);
        EXPECT_NEAR(est.value, oracle::dense_dirichlet_lambda1(1.0, N), 1e-8 * est.value);
    }
}

TEST(Lambda1, ContinuumLimitAndOrder) {
    for (auto kind : {BoundaryKind::Dirichlet, BoundaryKind::Antiperiodic}) {
        for (double T : {1.0, 2.5}) {
            const auto op = mbvp::build_boundary(kind, 1);
            const double exact = kPi2 / (T * T);
            const double e400 = mbvp::lambda1_estimate(op, T, 400).value;
            const double e800 = mbvp::lambda1_estimate(op, T, 800).value;
            EXPECT_NEAR(e400, exact, 0.01 * exact);
            const double ratio = (exact - e400) / (exact - e800);
            EXPECT_GE(ratio, 3.5);
            EXPECT_LE(ratio, 4.5);
        }
    }
}

TEST(Lambda1, HigherDimensionsAndRotation) {
    const auto d = mbvp::lambda1_estimate(mbvp::build_boundary(BoundaryKind::Dirichlet, 3), 1.0, 200);
    EXPECT_NEAR(d.value, oracle::discrete_dirichlet_lambda1(1.0, 200), 1e-8 * d.value);
    mbvp::BoundaryParams params;
    params.matrix = (mbvp::Mat(2, 2) << 0, 1, -1, 0).finished();
    const auto r = mbvp::lambda1_estimate(mbvp::build_boundary(BoundaryKind::LinearPSD, 1, params), 1.0);
    EXPECT_EQ(r.value, 0.0);
}

TEST(Lambda1, ConeCertificateImpliesPositiveValue) {
    for (auto kind : {BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Periodic,
                      BoundaryKind::Antiperiodic}) {
        for (int q : {1, 2}) {
            const auto op = mbvp::build_boundary(kind, q);
            const auto est = mbvp::lambda1_estimate(op, 1.0, 100);
            EXPECT_EQ(mbvp::cone_diagonal_check(op), est.value > 0.0) << mbvp::kind_name(kind);
        }
    }
}

TEST(Lambda1, RejectsConvexSetDomains) {
    mbvp::BoundaryParams ball;
    ball.projection = mbvp::ball_projection(1.0);
    EXPECT_THROW(mbvp::lambda1_estimate(mbvp::build_boundary(BoundaryKind::ProjectionProx, 1, ball), 1.0),
                 mbvp::Unsupported);
}

TEST(CheckGrowth, WorkedExamples) {
    const auto box = small_box();
    const mbvp::VectorField minus_x = [](double, const Vec& x, const Vec&) { return Vec(-x); };
    auto r = mbvp::check_growth(minus_x, GrowthRole::F1, f1_constants(0, 0, 0), box, 1.0, 1, 1);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(std::abs(r.worst_violation), 1e-9);

    const mbvp::VectorField plus_x = [](double, const Vec& x, const Vec&) { return x; };
    r = mbvp::check_growth(plus_x, GrowthRole::F1, f1_constants(0.5, 0, 0), box, 1.0, 1, 1);
    EXPECT_FALSE(r.pass);
    // The witness reproduces the violation |x|^2 - (-0.5 |x|^2) = 1.5 |x|^2.
    EXPECT_NEAR(r.worst_violation, 1.5 * r.witness.x.squaredNorm(), 1e-9 * r.worst_violation);
    EXPECT_NEAR(r.witness.x.norm(), box.radius, 1e-9);

    const mbvp::VectorField sine = [](double, const Vec& x, const Vec& y) {
        return Vec(-x + Vec::Constant(1, std::sin(y[0])));
    };
    r = mbvp::check_growth(sine, GrowthRole::F1, f1_constants(0.5, 0, 0.5), box, 1.0, 1, 1);
    EXPECT_TRUE(r.pass);
}

TEST(CheckGrowth, SecondComponentAndScalarRoles) {
    const auto box = small_box();
    // <f2 | y> = x y - y^2 <= x^2 / 2 - y^2 / 2
    const mbvp::VectorField f2 = [](double, const Vec& x, const Vec& y) { return Vec(x - y); };
    EXPECT_TRUE(mbvp::check_growth(f2, GrowthRole::F2, f2_constants(0.5, 0.5, 0), box, 1.0, 1, 1).pass);
    EXPECT_FALSE(mbvp::check_growth(f2, GrowthRole::F2, f2_constants(0.1, 0.5, 0), box, 1.0, 1, 1).pass);
    const mbvp::VectorField cubic = [](double, const Vec& x, const Vec&) { return Vec(-x.array().cube()); };
    EXPECT_TRUE(mbvp::check_growth(cubic, GrowthRole::Scalar, f1_constants(0, 0, 2), box, 1.0, 1, 0).pass);
    // -x^4 <= -x^2 + delta needs delta >= max(x^2 - x^4) = 1/4.
    EXPECT_TRUE(mbvp::check_growth(cubic, GrowthRole::Scalar, f1_constants(0, 0, 0.25), box, 1.0, 1, 0).pass);
    EXPECT_FALSE(mbvp::check_growth(cubic, GrowthRole::Scalar, f1_constants(0, 0, 0.2), box, 1.0, 1, 0).pass);
}

TEST(CheckGrowth, RejectsSmallSampleCounts) {
    mbvp::SampleBox box;
    box.samples = 10;
    const mbvp::VectorField f = [](double, const Vec& x, const Vec&) { return Vec(-x); };
    EXPECT_THROW(mbvp::check_growth(f, GrowthRole::F1, {}, box, 1.0, 1, 1), mbvp::InvalidParams);
}

TEST(CheckGrowth, IsReproducible) {
    const auto box = small_box();
    const mbvp::VectorField f = [](double t, const Vec& x, const Vec& y) {
        return Vec(-x + y * std::cos(t));
    };
    const auto a = mbvp::check_growth(f, GrowthRole::F1, f1_constants(0.5, 0.5, 0), box, 1.0, 2, 2);
    const auto b = mbvp::check_growth(f, GrowthRole::F1, f1_constants(0.5, 0.5, 0), box, 1.0, 2, 2);
    EXPECT_EQ(a.worst_violation, b.worst_violation);
    EXPECT_EQ(a.witness.x, b.witness.x);
}

TEST(SampledDelta, ExampleForcingTerm) {
    // <b h(t) x / (1 + x^2)> is at most |b| / 2, attained at |x| = 1, |h| = 1.
    const auto box = small_box();
    const mbvp::VectorField f = [](double t, const Vec& x, const Vec&) {
        return Vec(-0.6 * x + Vec::Constant(1, 0.4 * std::cos(2 * kPi * t) / (1 + x.squaredNorm())));
    };
    const double delta = mbvp::sampled_delta(f, GrowthRole::F1, f1_constants(0.4, 0.4, 0), box, 1.0, 1, 1);
    EXPECT_GT(delta, 0.15);
    EXPECT_LE(delta, 0.2 + 1e-12);
}

TEST(SelectCase, WorkedExamples) {
    auto sel = mbvp::select_case(fd(kPi2), fd(kPi2), {}, 1.0);
    EXPECT_EQ(sel.which, TheoremCase::I);
    EXPECT_NEAR(sel.bound, 2.0 * std::sqrt(1.0 + 1.0 / kPi2), 1e-12);
    EXPECT_NEAR(sel.bound, 2.0992, 1e-3);

    mbvp::GrowthHypotheses hyp;
    hyp.f1 = f1_constants(0.5, 1.0, 0.0);
    sel = mbvp::select_case(zero(), fd(kPi2), hyp, 1.0);
    EXPECT_EQ(sel.which, TheoremCase::II);
    EXPECT_NEAR(sel.bound, std::sqrt(2.0 / kPi2) + std::sqrt(1.0 + 1.0 / kPi2), 1e-12);

    mbvp::GrowthHypotheses hyp3;
    hyp3.f2 = f2_constants(1.0, 0.5, 0.0);
    sel = mbvp::select_case(fd(kPi2), zero(), hyp3, 1.0);
    EXPECT_EQ(sel.which, TheoremCase::III);
    EXPECT_NEAR(sel.bound, std::sqrt(1.0 + 1.0 / kPi2) + std::sqrt(2.0 / kPi2), 1e-12);

    mbvp::GrowthHypotheses hyp4;
    hyp4.f1 = f1_constants(0.4, 0.4, 1.0);
    hyp4.f2 = f2_constants(0.4, 0.4, 1.0);
    sel = mbvp::select_case(zero(), zero(), hyp4, 1.0);
    EXPECT_EQ(sel.which, TheoremCase::IV);
    ASSERT_TRUE(sel.beta.has_value());
    EXPECT_NEAR(sel.beta->beta_u, 5.0, 1e-12);
    EXPECT_NEAR(sel.beta->beta_v, 5.0, 1e-12);
    EXPECT_NEAR(sel.bound, 2.0 * std::sqrt(5.0), 1e-12);

    hyp4.f1 = f1_constants(0.6, 0.5, 1.0);
    hyp4.f2 = f2_constants(0.5, 0.6, 1.0);
    sel = mbvp::select_case(zero(), zero(), hyp4, 1.0);
    EXPECT_EQ(sel.which, TheoremCase::None);
    EXPECT_TRUE(std::isinf(sel.bound));
}

TEST(SelectCase, Precedence) {
    mbvp::GrowthHypotheses hyp;
    hyp.f1 = f1_constants(0.1, 0.1, 0.1);
    hyp.f2 = f2_constants(0.1, 0.1, 0.1);
    EXPECT_EQ(mbvp::select_case(fd(1.0), fd(1.0), hyp, 1.0).which, TheoremCase::I);
    EXPECT_EQ(mbvp::select_case(zero(), fd(1.0), hyp, 1.0).which, TheoremCase::II);
    EXPECT_EQ(mbvp::select_case(fd(1.0), zero(), hyp, 1.0).which, TheoremCase::III);
    EXPECT_EQ(mbvp::select_case(zero(), zero(), hyp, 1.0).which, TheoremCase::IV);
}

TEST(SelectCase, BoundsAreAntitoneInLambdaAndMonotoneInDelta) {
    double previous = std::numeric_limits<double>::infinity();
    for (double l : {0.5, 1.0, 2.0, 10.0, 100.0}) {
        const double b = mbvp::select_case(fd(l), fd(2.0 * l), {}, 1.0).bound;
        EXPECT_LE(b, previous);
        previous = b;
    }
    previous = std::numeric_limits<double>::infinity();
    for (double l : {0.5, 1.0, 2.0, 10.0}) {
        mbvp::GrowthHypotheses hyp;
        hyp.f1 = f1_constants(0.5, 1.0, 0.3);
        const double b = mbvp::select_case(zero(), fd(l), hyp, 2.0).bound;
        EXPECT_LE(b, previous);
        previous = b;
    }
    previous = 0.0;
    for (double delta : {0.0, 0.1, 1.0, 3.0}) {
        mbvp::GrowthHypotheses hyp;
        hyp.f1 = f1_constants(0.2, 0.3, delta);
        hyp.f2 = f2_constants(0.1, 0.4, delta);
        const double b = mbvp::select_case(zero(), zero(), hyp, 1.0).bound;
        EXPECT_GE(b, previous);
        previous = b;
    }
}

TEST(Coercivity, LinearField) {
    const mbvp::VectorField f = [](double, const Vec& x, const Vec&) { return Vec(-x); };
    const auto r = mbvp::coercivity_constants(f, small_box(), 1.0, 1);
    EXPECT_NEAR(r.coercivity.sigma, 1.0, 1e-12);
    EXPECT_EQ(r.coercivity.rho, 0.0);
    EXPECT_EQ(r.coercivity.k, 0.0);
    EXPECT_NEAR(r.growth.a, 0.0, 1e-12);
    EXPECT_NEAR(r.growth.delta, 0.0, 1e-12);
}

TEST(Coercivity, CubicField) {
    const mbvp::VectorField f = [](double, const Vec& x, const Vec&) { return Vec(-x.array().cube()); };
    const auto r = mbvp::coercivity_constants(f, mbvp::SampleBox{}, 1.0, 1);
    EXPECT_NEAR(r.coercivity.sigma, 1.0, 0.05);
    EXPECT_NEAR(r.coercivity.rho, 1.0, 0.05);
    EXPECT_NEAR(r.coercivity.k, 1.0, 0.05);
    EXPECT_NEAR(r.growth.a, 0.0, 0.05);
    EXPECT_NEAR(r.growth.delta, 2.0, 0.1);
    EXPECT_TRUE(mbvp::check_growth(f, GrowthRole::Scalar, r.growth, mbvp::SampleBox{}, 1.0, 1, 0).pass);
}

TEST(Coercivity, RejectsExpandingField) {
    const mbvp::VectorField f = [](double, const Vec& x, const Vec&) { return x; };
    EXPECT_THROW(mbvp::coercivity_constants(f, small_box(), 1.0, 1), mbvp::NotCoercive);
}
