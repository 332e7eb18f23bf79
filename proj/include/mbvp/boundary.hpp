#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "mbvp/geometry.hpp"

namespace mbvp {

enum class BoundaryKind { Dirichlet, Neumann, Periodic, Antiperiodic, LinearPSD, ProjectionProx };

/// Shape of D(gamma) in R^q x R^q.
enum class DomainDescriptor { SinglePoint0, FullSpace, Diagonal, Antidiagonal, ConvexSet };

std::string_view kind_name(BoundaryKind kind);
std::optional<BoundaryKind> parse_kind(std::string_view name);
std::string_view domain_name(DomainDescriptor domain);

/// Metric projection of R^{2q} onto a closed convex set containing the origin.
using ProjectionMap = std::function<Vec(const Vec&)>;

struct BoundaryParams {
    Mat matrix;                // LinearPSD: the 2q x 2q matrix A
    ProjectionMap projection;  // ProjectionProx: projection onto C
};

/// A maximal monotone operator gamma on R^q x R^q, carried by its resolvent
/// J_lambda = (I + lambda gamma)^{-1}. Immutable after construction.
class BoundaryOperator {
public:
    BoundaryKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return q_; }
    DomainDescriptor domain() const noexcept { return domain_; }
    const Mat& matrix() const noexcept { return params_.matrix; }

    /// J_lambda(z) for z = (z_0, z_T) in R^{2q}. Requires lambda > 0.
    Vec resolvent(double lambda, const Vec& z) const;

private:
    BoundaryOperator(BoundaryKind kind, int q, DomainDescriptor domain, BoundaryParams params)
        : kind_(kind), q_(q), domain_(domain), params_(std::move(params)) {}

    friend BoundaryOperator build_boundary(BoundaryKind kind, int q, BoundaryParams params);

    BoundaryKind kind_;
    int q_;
    DomainDescriptor domain_;
    BoundaryParams params_;
};

/// Validates parameters (PSD test for LinearPSD, idempotence and P(0) = 0 for
/// ProjectionProx) and throws InvalidParams when they fail.
BoundaryOperator build_boundary(BoundaryKind kind, int q, BoundaryParams params = {});

inline Vec resolvent(const BoundaryOperator& op, double lambda, const Vec& z) {
    return op.resolvent(lambda, z);
}

/// Boundary data of a trajectory: position (u(0), u(T)) and flux (w(0), -w(T)).
struct BoundaryPoint {
    Vec position;
    Vec flux;
};

/// R = position - J_lambda(position + lambda * flux); zero iff flux in gamma(position).
Vec boundary_residual(const BoundaryOperator& op, double lambda, const BoundaryPoint& bp);

/// True iff the closed cone generated by D(gamma) meets the diagonal only at 0.
/// Throws Unsupported for ConvexSet domains.
bool cone_diagonal_check(const BoundaryOperator& op);

/// Componentwise clamp onto [lower, upper]; requires lower <= 0 <= upper.
ProjectionMap box_projection(Vec lower, Vec upper);

/// Radial projection onto the closed ball of the given radius.
ProjectionMap ball_projection(double radius);

}  // namespace mbvp
