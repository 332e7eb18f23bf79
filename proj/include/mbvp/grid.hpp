#pragma once

#include "mbvp/geometry.hpp"

namespace mbvp {

/// Uniform partition t_i = i T / N of [0, T].
class Grid {
public:
    /// Requires T > 0 and N >= 16 even; throws InvalidParams otherwise.
    Grid(double T, int N);

    double T() const noexcept { return T_; }
    int N() const noexcept { return N_; }
    int nodes() const noexcept { return N_ + 1; }
    double step() const noexcept { return T_ / N_; }
    double node(int i) const noexcept { return T_ * i / N_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double T_;
    int N_;
};

/// Nodal values of u and of w = phi(u') for a q-dimensional trajectory.
/// Row i of `u` and `w` holds the values at t_i.
struct GridFunction {
    Mat u;
    Mat w;

    static GridFunction zeros(const Grid& grid, int q);

    int dim() const noexcept { return static_cast<int>(u.cols()); }
    int nodes() const noexcept { return static_cast<int>(u.rows()); }

    /// Recovered velocity phi^{-1}(w_i) at every node.
    Mat velocity() const;
    /// max_i |phi^{-1}(w_i)|.
    double max_speed() const;
};

/// Discrete norms by trapezoidal quadrature; u' is taken as phi^{-1}(w).
double l2_norm_squared(const Grid& grid, const Mat& values);
double h1_norm_squared(const Grid& grid, const GridFunction& gf);
double h1_norm(const Grid& grid, const GridFunction& gf);

/// ||a - b||^2_{H^1} with the derivative difference phi^{-1}(w_a) - phi^{-1}(w_b).
double h1_distance_squared(const Grid& grid, const GridFunction& a, const GridFunction& b);

/// Largest absolute entry over u and w.
double sup_distance(const GridFunction& a, const GridFunction& b);

/// Piecewise-linear transfer of nodal values from one grid to another over the same [0, T].
GridFunction interpolate(const GridFunction& gf, const Grid& from, const Grid& to);

}  // namespace mbvp
