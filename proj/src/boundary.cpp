#include "mbvp/boundary.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "mbvp/errors.hpp"

namespace mbvp {

namespace {

constexpr std::uint64_t kCertificateSeed = 24397;
constexpr int kCertificateSamples = 10000;
constexpr double kPsdTolerance = 1e-10;
constexpr int kMaxEigenCheckDim = 64;

struct KindEntry {
    BoundaryKind kind;
    std::string_view name;
};

constexpr std::array<KindEntry, 6> kKinds{{
    {BoundaryKind::Dirichlet, "dirichlet"},
    {BoundaryKind::Neumann, "neumann"},
    {BoundaryKind::Periodic, "periodic"},
    {BoundaryKind::Antiperiodic, "antiperiodic"},
    {BoundaryKind::LinearPSD, "linear_psd"},
    {BoundaryKind::ProjectionProx, "projection"},
}};

DomainDescriptor domain_of(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::Dirichlet: return DomainDescriptor::SinglePoint0;
        case BoundaryKind::Neumann: return DomainDescriptor::FullSpace;
        case BoundaryKind::Periodic: return DomainDescriptor::Diagonal;
        case BoundaryKind::Antiperiodic: return DomainDescriptor::Antidiagonal;
        case BoundaryKind::LinearPSD: return DomainDescriptor::FullSpace;
        case BoundaryKind::ProjectionProx: return DomainDescriptor::ConvexSet;
    }
    return DomainDescriptor::ConvexSet;
}

void check_psd(const Mat& a, int q) {
    const int dim = 2 * q;
    if (a.rows() != dim || a.cols() != dim) {
        throw InvalidParams("linear_psd: matrix must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!a.allFinite()) {
        throw InvalidParams("linear_psd: matrix has non-finite entries");
    }
    std::mt19937_64 rng(kCertificateSeed);
    std::normal_distribution<double> normal;
    Vec z(dim);
    for (int s = 0; s < kCertificateSamples; ++s) {
        for (int k = 0; k < dim; ++k) z[k] = normal(rng);
        const double form = z.dot(a * z);
        if (form < -kPsdTolerance * z.squaredNorm()) {
            throw InvalidParams("linear_psd: matrix is not positive semi-definite (<<Az|z>> = " +
                                std::to_string(form) + ")");
        }
    }
    if (dim <= kMaxEigenCheckDim) {
        const Mat sym = 0.5 * (a + a.transpose());
        const double lowest = Eigen::SelfAdjointEigenSolver<Mat>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
        if (lowest < -kPsdTolerance * std::max(1.0, sym.norm())) {
            throw InvalidParams("linear_psd: symmetric part has eigenvalue " + std::to_string(lowest));
        }
    }
}

void check_projection(const ProjectionMap& proj, int q) {
    if (!proj) {
        throw InvalidParams("projection: no projection map supplied");
    }
    const int dim = 2 * q;
    const Vec at_origin = proj(Vec::Zero(dim));
    if (at_origin.size() != dim || at_origin.norm() != 0.0) {
        throw InvalidParams("projection: set must contain the origin (P(0) != 0)");
    }
    std::mt19937_64 rng(kCertificateSeed);
    std::normal_distribution<double> normal;
    Vec z(dim);
    for (int s = 0; s < kCertificateSamples; ++s) {
        for (int k = 0; k < dim; ++k) z[k] = 4.0 * normal(rng);
        const Vec p = proj(z);
        const Vec pp = proj(p);
        if (p.size() != dim || (pp - p).norm() > 1e-10 * (1.0 + z.norm())) {
            throw InvalidParams("projection: map is not idempotent");
        }
    }
}

}  // namespace

std::string_view kind_name(BoundaryKind kind) {
    for (const auto& entry : kKinds) {
        if (entry.kind == kind) return entry.name;
    }
    return "unknown";
}

std::optional<BoundaryKind> parse_kind(std::string_view name) {
    for (const auto& entry : kKinds) {
        if (entry.name == name) return entry.kind;
    }
    return std::nullopt;
}

std::string_view domain_name(DomainDescriptor domain) {
    switch (domain) {
        case DomainDescriptor::SinglePoint0: return "single_point_0";
        case DomainDescriptor::FullSpace: return "full_space";
        case DomainDescriptor::Diagonal: return "diagonal";
        case DomainDescriptor::Antidiagonal: return "antidiagonal";
        case DomainDescriptor::ConvexSet: return "convex_set";
    }
    return "unknown";
}

BoundaryOperator build_boundary(BoundaryKind kind, int q, BoundaryParams params) {
    if (q < 1) {
        throw InvalidParams("boundary operator dimension must be >= 1");
    }
    if (kind == BoundaryKind::LinearPSD) {
        check_psd(params.matrix, q);
    } else if (kind == BoundaryKind::ProjectionProx) {
        check_projection(params.projection, q);
    }
    return BoundaryOperator(kind, q, domain_of(kind), std::move(params));
}

Vec BoundaryOperator::resolvent(double lambda, const Vec& z) const {
    if (!(lambda > 0.0)) {
        throw InvalidParams("resolvent parameter must be positive");
    }
    const auto q = static_cast<Eigen::Index>(q_);
    switch (kind_) {
        case BoundaryKind::Dirichlet:
            return Vec::Zero(2 * q);
        case BoundaryKind::Neumann:
            return z;
        case BoundaryKind::Periodic: {
            // Projection onto the diagonal {(x, x)}.
            const Vec mean = 0.5 * (z.head(q) + z.tail(q));
            Vec out(2 * q);
            out << mean, mean;
            return out;
        }
        case BoundaryKind::Antiperiodic: {
            // Projection onto the antidiagonal {(x, -x)}.
            const Vec half = 0.5 * (z.head(q) - z.tail(q));
            Vec out(2 * q);
            out << half, -half;
            return out;
        }
        case BoundaryKind::LinearPSD: {
            const Mat shifted = Mat::Identity(2 * q, 2 * q) + lambda * params_.matrix;
            return shifted.partialPivLu().solve(z);
        }
        case BoundaryKind::ProjectionProx:
            return params_.projection(z);
    }
    return z;
}

Vec boundary_residual(const BoundaryOperator& op, double lambda, const BoundaryPoint& bp) {
    return bp.position - op.resolvent(lambda, bp.position + lambda * bp.flux);
}

bool cone_diagonal_check(const BoundaryOperator& op) {
    switch (op.domain()) {
        case DomainDescriptor::SinglePoint0:
        case DomainDescriptor::Antidiagonal:
            return true;
        case DomainDescriptor::FullSpace:
        case DomainDescriptor::Diagonal:
            return false;
        case DomainDescriptor::ConvexSet:
            break;
    }
    throw Unsupported("cone_diagonal_check: no analytic cone for a general convex domain");
}

ProjectionMap box_projection(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || (lower.array() > 0.0).any() || (upper.array() < 0.0).any()) {
        throw InvalidParams("box projection: bounds must satisfy lower <= 0 <= upper");
    }
    return [lower = std::move(lower), upper = std::move(upper)](const Vec& z) -> Vec {
        if (z.size() != lower.size()) {
            throw InvalidParams("box projection: dimension mismatch");
        }
        return z.cwiseMax(lower).cwiseMin(upper);
    };
}

ProjectionMap ball_projection(double radius) {
    if (!(radius > 0.0)) {
        throw InvalidParams("ball projection: radius must be positive");
    }
    return [radius](const Vec& z) -> Vec {
        const double r = z.norm();
        return r <= radius ? z : Vec(z * (radius / r));
    };
}

}  // namespace mbvp
