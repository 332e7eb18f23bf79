#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbvp/config.hpp"

namespace mbvp {

/// Exit codes of run_command.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitNoConvergence = 1;
inline constexpr int kExitConfigError = 2;

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

/// Outcome of the sampled growth test for one component.
struct GrowthCertificate {
    std::string role;  // "f1" or "f2"
    GrowthConstants constants;
    bool delta_sampled;
    GrowthCheck check;
};

struct Certification {
    GrowthHypotheses hypotheses;  // only the components whose check passed
    std::vector<GrowthCertificate> certificates;
};

/// Resolves missing deltas by sampling and runs check_growth on every declared component.
Certification certify(const ProblemConfig& config);

/// Writes t, u1..un, v1..vm, du1..dun, dv1..dvm with one row per grid node.
void write_solution_csv(const std::filesystem::path& path, const SolveReport& report);

/// Dispatches `solve`, `check`, `lambda1`, `matrix` and `study`. Diagnostics go to `err`,
/// command results that are not written to files go to `out`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbvp
