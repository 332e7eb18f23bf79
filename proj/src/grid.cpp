#include "mbvp/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mbvp/errors.hpp"

namespace mbvp {

Grid::Grid(double T, int N) : T_(T), N_(N) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw InvalidParams("grid: interval length T must be positive");
    }
    if (N < 16 || N % 2 != 0) {
        throw InvalidParams("grid: N must be an even integer >= 16");
    }
}

GridFunction GridFunction::zeros(const Grid& grid, int q) {
    return {Mat::Zero(grid.nodes(), q), Mat::Zero(grid.nodes(), q)};
}

Mat GridFunction::velocity() const {
    Mat out(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        out.row(i) = phi_inverse(w.row(i).transpose()).transpose();
    }
    return out;
}

double GridFunction::max_speed() const {
    double speed = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        speed = std::max(speed, phi_inverse(w.row(i).transpose()).norm());
    }
    return speed;
}

double l2_norm_squared(const Grid& grid, const Mat& values) {
    const Eigen::VectorXd sq = values.rowwise().squaredNorm();
    const double interior = sq.sum() - 0.5 * (sq(0) + sq(sq.size() - 1));
    return grid.step() * interior;
}

double h1_norm_squared(const Grid& grid, const GridFunction& gf) {
    return l2_norm_squared(grid, gf.u) + l2_norm_squared(grid, gf.velocity());
}

double h1_norm(const Grid& grid, const GridFunction& gf) {
    return std::sqrt(h1_norm_squared(grid, gf));
}

double h1_distance_squared(const Grid& grid, const GridFunction& a, const GridFunction& b) {
    return l2_norm_squared(grid, a.u - b.u) + l2_norm_squared(grid, a.velocity() - b.velocity());
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    return std::max((a.u - b.u).cwiseAbs().maxCoeff(), (a.w - b.w).cwiseAbs().maxCoeff());
}

GridFunction interpolate(const GridFunction& gf, const Grid& from, const Grid& to) {
    GridFunction out{Mat(to.nodes(), gf.dim()), Mat(to.nodes(), gf.dim())};
    for (int i = 0; i < to.nodes(); ++i) {
        const double s = to.node(i) / from.step();
        const int left = std::clamp(static_cast<int>(std::floor(s)), 0, from.N() - 1);
        const double frac = std::clamp(s - left, 0.0, 1.0);
        out.u.row(i) = (1.0 - frac) * gf.u.row(left) + frac * gf.u.row(left + 1);
        out.w.row(i) = (1.0 - frac) * gf.w.row(left) + frac * gf.w.row(left + 1);
    }
    return out;
}

}  // namespace mbvp
