#pragma once

#include <functional>

#include "mbvp/geometry.hpp"

namespace mbvp {

/// A continuous nonlinearity f(t, x, y) with x in R^n, y in R^m.
/// Implementations throw EvalError when the value is undefined or non-finite.
using VectorField = std::function<Vec(double t, const Vec& x, const Vec& y)>;

}  // namespace mbvp
