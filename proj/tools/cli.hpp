#pragma once

// Command-line front end. Everything the `agghb` executable does lives here so
// tests can drive it in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agghb/harness.hpp"
#include "agghb/problems.hpp"

namespace agghb::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsageOrIo = 1;
inline constexpr int kVerificationFailed = 2;

/// Runs one invocation; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Comma-separated doubles, no spaces. Throws std::invalid_argument.
std::vector<double> parse_list(const std::string& text);

/// Name of the built-in stand-in dataset accepted wherever a path is.
inline constexpr const char* kSyntheticData = "synthetic";

/// `name` as given if it exists, else $AGGHB_DATA_DIR/name (also trying a
/// ".gz" suffix). Throws std::runtime_error when nothing is found.
std::filesystem::path resolve_dataset(const std::string& name);

/// Loads `name` (a path or kSyntheticData) as a {-1, +1} dataset. A nonzero
/// `dim` overrides the inferred feature count.
Dataset load_dataset(const std::string& name, std::size_t dim = 0);

/// Builds the objective described by `spec`. A negative l2 / lambda means
/// "the benchmark default relative to the unregularized smoothness L0"
/// (L0 / 1e5 and L0 / 1000) and is replaced by the resolved value, as is a
/// dataset name by its resolved path, so the spec can rebuild the problem.
ProblemPtr build_problem(harness::ProblemSpec& spec);

/// Starting point: uniform in [-1, 1]^n from `seed` for the quadratic,
/// (-2, 2) for Rosenbrock, zeros for the logistic problems.
std::vector<double> default_x0(const harness::ProblemSpec& spec, std::size_t dim,
                               std::uint64_t seed);

}  // namespace agghb::cli
