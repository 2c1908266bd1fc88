#pragma once

// Experiment driver: runs GD / HB / AggHB on a Problem, records a per-iteration
// trace, tunes stepsizes over the a/L grid, and checks traces against the
// convergence bounds.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agghb/optim.hpp"
#include "agghb/problems.hpp"
#include "agghb/theory.hpp"

namespace agghb::harness {

enum class OptimizerKind { gd, hb, agghb };

enum class StepsizeSource { explicit_values, theory_nonconvex, theory_convex, tuned };

std::string to_string(OptimizerKind kind);
std::string to_string(StepsizeSource source);
OptimizerKind parse_optimizer_kind(const std::string& s);
StepsizeSource parse_stepsize_source(const std::string& s);

/// Which objective a run used. The harness only records it; the CLI builds
/// problems from it.
struct ProblemSpec {
  std::string id;    // quadratic | rosenbrock | logreg-l2 | logreg-ncvx
  std::string data;  // dataset path for the logistic problems
  double l2 = 0.0;
  double lambda = 0.0;
  std::size_t dim = 0;  // quadratic size, or feature-count override
};

struct RunConfig {
  ProblemSpec problem;
  OptimizerKind kind = OptimizerKind::agghb;
  // betas always; gammas only when source == explicit_values.
  AggConfig optimizer;
  std::size_t iterations = 1;
  StepsizeSource source = StepsizeSource::explicit_values;
  double tune_scale = 0.0;  // a in gamma = a / L when source == tuned
  std::vector<double> x0;
  std::uint64_t seed = 0;
  bool track_average = true;
  bool track_virtual_recursion = false;

  /// Throws std::invalid_argument on a zero budget, an empty x0, GD with
  /// nonzero momentum, HB with m != 1, or a source missing its parameter.
  void validate() const;
};

/// Momenta and stepsizes a run will actually use.
AggConfig resolve_stepsizes(const RunConfig& config, const Problem& problem);

struct TracePoint {
  std::size_t k = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  std::optional<double> dist_opt;
  std::optional<double> f_avg;
};

struct Trace {
  RunConfig config;
  AggConfig resolved;
  theory::TheoryConstants constants;
  double L = 0.0;
  double mu = 0.0;
  double averaging_rho = 1.0;
  std::vector<TracePoint> points;  // k = 0 .. K, shorter if diverged
  bool diverged = false;
  double wall_seconds = 0.0;
  // max_k |x~_{k+1} - x~_k + F grad f(x_k)| / (1 + |x~_k|), when tracked.
  std::optional<double> max_recursion_residual;
};

/// Deterministic given (config, problem) apart from wall_seconds. Divergence
/// truncates the trace and sets the flag instead of throwing.
Trace run(const RunConfig& config, const Problem& problem);

/// a in {2^-6, 2^-5, ..., 2^8}.
std::vector<double> tuning_grid();

struct TuneEntry {
  double a = 0.0;
  double final_f = 0.0;
  bool diverged = false;
};

struct TuneResult {
  RunConfig best;
  std::vector<TuneEntry> sweep;  // grid order
};

class TuningFailed : public std::runtime_error {
 public:
  TuningFailed(const std::string& what, std::vector<TuneEntry> sweep)
      : std::runtime_error(what), sweep_(std::move(sweep)) {}
  const std::vector<TuneEntry>& sweep() const { return sweep_; }

 private:
  std::vector<TuneEntry> sweep_;
};

/// Runs every grid point (on `jobs` threads, 0 = all cores) and keeps the
/// lowest final f among runs that did not diverge; ties go to the smaller a.
TuneResult tune(const RunConfig& base, const Problem& problem, unsigned jobs = 0);

struct ReferenceSolution {
  std::vector<double> x;
  double f = 0.0;
  double grad_norm = 0.0;  // certificate: |grad f(x)| at the returned point
  std::size_t iterations = 0;
  bool closed_form = false;
};

/// Known optimum when the problem carries one; otherwise gradient descent with
/// stepsize 1/L until |grad f| <= tol or max_iterations. Throws
/// std::invalid_argument for non-convex problems.
ReferenceSolution reference_solution(const Problem& problem, double tol = 1e-10,
                                     std::size_t max_iterations = 1'000'000);

enum class BoundKind { nonconvex, convex };

struct Checkpoint {
  std::size_t K = 0;
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerificationReport {
  BoundKind kind = BoundKind::nonconvex;
  std::vector<Checkpoint> checkpoints;
  // Reference gradient norm for convex checks; each bound is relaxed by twice
  // this amount to cover the error in f_ref.
  std::optional<double> certificate;

  bool all_pass() const;
};

/// K = 10, 100, 1000, ... up to the budget, plus the budget itself.
std::vector<std::size_t> checkpoint_schedule(std::size_t budget);

/// Theory-stepsize traces only (VerificationRefused otherwise).
/// Non-convex: min_{1<=k<=K} |grad f(x_k)|^2 against the non-convex bound.
/// Convex: f(xbar_K) - f_ref against the convex bound. A missing reference is
/// computed with reference_solution.
VerificationReport verify_bounds(const Trace& trace, const Problem& problem,
                                 const std::optional<ReferenceSolution>& reference = {});

// Trace files: CSV (k,f,grad_norm,dist_opt,f_avg) plus a JSON sidecar with
// the run configuration and the theory constants.

std::filesystem::path metadata_path(const std::filesystem::path& csv);

/// Writes `csv` and its sidecar. Byte-identical output for identical traces.
void export_trace(const Trace& trace, const std::filesystem::path& csv);

/// Reads a trace written by export_trace. Throws ParseError with the line
/// number for a malformed CSV and std::runtime_error for unreadable files.
Trace import_trace(const std::filesystem::path& csv);

std::string trace_csv(const Trace& trace);
std::string trace_metadata(const Trace& trace);

}  // namespace agghb::harness
