#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbvp/analysis.hpp"
#include "mbvp/expression.hpp"
#include "mbvp/nonlinear.hpp"

namespace mbvp {

/// Growth constants declared for one component: (a, b) for f1, (c, d) for f2.
/// A missing delta is replaced by the sampled certificate.
struct GrowthSpec {
    double first;
    double second;
    std::optional<double> delta;
};

struct StudySpec {
    std::vector<int> levels{50, 100, 200, 400};
    int reference_N = 3200;
};

/// A validated problem file.
///
///   {
///     "T": 1, "n": 1, "m": 1, "N": 200,
///     "f1": ["x1 - y1"], "f2": "sin(t) - y1",
///     "gamma": {"kind": "dirichlet"},
///     "eta":   {"kind": "projection", "set": "box", "lower": [-1, -1], "upper": [1, 1]},
///     "solver":   {"tol": 1e-8, "theta": 0.5, "lambda": 1, "strategy": "auto"},
///     "growth":   {"f1": {"a": 2, "b": 1}, "f2": {"c": 1, "d": 2, "delta": 1}},
///     "sampling": {"radius": 10, "samples": 10000, "seed": 24397},
///     "study":    {"levels": [50, 100, 200], "reference_N": 1600},
///     "output": "out"
///   }
///
/// Boundary kinds: dirichlet, neumann, periodic, antiperiodic, linear_psd (with a
/// 2q x 2q "matrix"), projection (with "set": "box" and "lower"/"upper", or "ball"
/// and "radius"). Unknown keys are rejected.
struct ProblemConfig {
    SystemProblem problem;
    std::vector<Expression> f1;
    std::vector<Expression> f2;
    SolveOptions solve;
    std::optional<GrowthSpec> growth_f1;
    std::optional<GrowthSpec> growth_f2;
    SampleBox sampling;
    StudySpec study;
    std::string output = "mbvp_out";
};

/// Throws ConfigError naming the offending key.
ProblemConfig parse_config(std::string_view json_text);
ProblemConfig load_config(const std::filesystem::path& path);

/// Replaces the sampling and solver seeds.
void override_seed(ProblemConfig& config, std::uint64_t seed);

/// Vector field whose i-th component is components[i].
VectorField compile_field(std::vector<Expression> components);

}  // namespace mbvp
