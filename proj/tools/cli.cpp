#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "agghb/error.hpp"
#include "agghb/libsvm.hpp"
#include "agghb/theory.hpp"

namespace agghb::cli {
namespace {

using harness::OptimizerKind;
using harness::ProblemSpec;
using harness::RunConfig;
using harness::StepsizeSource;

// Rows and columns of the stand-in, matching the credit benchmark it replaces.
constexpr std::size_t kSyntheticRows = 690;
constexpr std::size_t kSyntheticCols = 14;
constexpr std::uint64_t kSyntheticSeed = 1;

constexpr double kDefaultL2Ratio = 1e-5;
constexpr double kDefaultLambdaRatio = 1e-3;

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
  return out;
}

// Usage problems that CLI11 cannot express (contradictory or malformed flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  std::string problem;
  std::string data;
  std::optional<std::size_t> dim;
  std::string betas;
  std::string gammas = "tune";
  std::string kind = "agghb";
  std::size_t iters = 1000;
  std::optional<double> l2;
  std::optional<double> lambda;
  std::string out = "trace.csv";
  std::string x0;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
};

void add_problem_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--problem", f.problem, "Objective")
      ->required()
      ->check(CLI::IsMember({"quadratic", "rosenbrock", "logreg-l2", "logreg-ncvx"}));
  cmd->add_option("--data", f.data, "LIBSVM file (logistic problems), or 'synthetic'");
  cmd->add_option("--dim", f.dim,
                  "Quadratic size (Q = diag(1..dim), b = 0; default 10), or feature count "
                  "override for a dataset")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--l2", f.l2, "l2 strength for logreg-l2 (default L0/1e5)");
  cmd->add_option("--lambda", f.lambda, "Regularizer strength for logreg-ncvx (default L0/1000)");
  cmd->add_option("--betas", f.betas, "Momentum list, e.g. 0.9,0.95,0.99");
  cmd->add_option("--kind", f.kind, "Optimizer")->check(CLI::IsMember({"gd", "hb", "agghb"}));
  cmd->add_option("--iters", f.iters, "Iteration budget K")->check(CLI::PositiveNumber);
  cmd->add_option("--x0", f.x0, "Starting point (comma list); default depends on the problem");
  cmd->add_option("--seed", f.seed, "Seed for randomized initialization");
  cmd->add_option("--jobs", f.jobs, "Tuning threads (0 = all cores)");
}

RunConfig base_config(RunFlags& f, ProblemPtr& problem) {
  ProblemSpec spec;
  spec.id = f.problem;
  spec.data = f.data;
  const bool logistic = f.problem == "logreg-l2" || f.problem == "logreg-ncvx";
  spec.dim = f.dim.value_or(logistic ? 0 : 10);
  if (f.problem == "rosenbrock" && f.dim && *f.dim != 2) {
    throw UsageError("rosenbrock is two-dimensional");
  }
  if (logistic && f.data.empty()) throw UsageError(f.problem + " needs --data");
  if (!logistic && !f.data.empty()) throw UsageError("--data only applies to logistic problems");
  if (f.l2 && f.problem != "logreg-l2") throw UsageError("--l2 only applies to logreg-l2");
  if (f.lambda && f.problem != "logreg-ncvx") {
    throw UsageError("--lambda only applies to logreg-ncvx");
  }
  spec.l2 = f.l2.value_or(-1.0);
  spec.lambda = f.lambda.value_or(-1.0);
  if (f.l2 && *f.l2 < 0.0) throw UsageError("--l2 must be >= 0");
  if (f.lambda && *f.lambda < 0.0) throw UsageError("--lambda must be >= 0");
  problem = build_problem(spec);

  RunConfig c;
  c.problem = spec;
  c.kind = harness::parse_optimizer_kind(f.kind);
  if (f.betas.empty()) {
    if (c.kind != OptimizerKind::gd) throw UsageError("--betas is required");
    c.optimizer.betas = {0.0};
  } else {
    c.optimizer.betas = parse_list(f.betas);
  }
  c.iterations = f.iters;
  c.seed = f.seed;
  c.x0 = f.x0.empty() ? default_x0(spec, problem->dim(), f.seed) : parse_list(f.x0);
  if (c.x0.size() != problem->dim()) {
    throw UsageError("--x0 has " + std::to_string(c.x0.size()) + " entries, problem dimension is " +
                     std::to_string(problem->dim()));
  }
  return c;
}

void print_sweep(std::ostream& out, const std::vector<harness::TuneEntry>& sweep) {
  for (const auto& e : sweep) {
    out << "sweep a=" << num(e.a) << " final_f=" << num(e.final_f)
        << " diverged=" << (e.diverged ? 1 : 0) << '\n';
  }
}

void print_run_summary(std::ostream& out, const harness::Trace& t, const Problem& problem) {
  out << "problem=" << problem.name() << '\n'
      << "kind=" << harness::to_string(t.config.kind) << '\n'
      << "m=" << t.resolved.m() << '\n'
      << "betas=" << join(t.resolved.betas) << '\n'
      << "gammas=" << join(t.resolved.gammas) << '\n'
      << "stepsize_source=" << harness::to_string(t.config.source) << '\n';
  if (t.config.source == StepsizeSource::tuned) out << "tune_a=" << num(t.config.tune_scale) << '\n';
  out << "L=" << num(t.L) << '\n'
      << "mu=" << num(t.mu) << '\n'
      << "F=" << num(t.constants.F) << '\n'
      << "iterations=" << t.config.iterations << '\n'
      << "recorded=" << t.points.size() << '\n'
      << "diverged=" << (t.diverged ? 1 : 0) << '\n';
  if (!t.points.empty()) {
    out << "final_f=" << num(t.points.back().f) << '\n'
        << "final_grad_norm=" << num(t.points.back().grad_norm) << '\n';
  }
}

int cmd_run(RunFlags& f, std::ostream& out) {
  ProblemPtr problem;
  RunConfig c = base_config(f, problem);
  if (f.gammas == "tune") {
    const auto result = harness::tune(c, *problem, f.jobs);
    print_sweep(out, result.sweep);
    c = result.best;
  } else if (f.gammas == "theory-ncvx") {
    c.source = StepsizeSource::theory_nonconvex;
  } else if (f.gammas == "theory-cvx") {
    c.source = StepsizeSource::theory_convex;
  } else {
    c.source = StepsizeSource::explicit_values;
    c.optimizer.gammas = parse_list(f.gammas);
    if (c.optimizer.gammas.size() == 1 && c.optimizer.m() > 1) {
      c.optimizer.gammas.assign(c.optimizer.m(), c.optimizer.gammas[0]);
    }
  }
  if (c.source == StepsizeSource::theory_nonconvex || c.source == StepsizeSource::theory_convex) {
    if (c.kind == OptimizerKind::gd) throw UsageError("theoretical stepsizes need momentum");
  }
  if (c.source == StepsizeSource::theory_convex && !problem->convex()) {
    throw UsageError("theory-cvx needs a convex problem; " + problem->name() + " is not");
  }
  const auto trace = harness::run(c, *problem);
  harness::export_trace(trace, f.out);
  print_run_summary(out, trace, *problem);
  out << "out=" << f.out << '\n';
  return kOk;
}

int cmd_tune(RunFlags& f, std::ostream& out) {
  ProblemPtr problem;
  RunConfig c = base_config(f, problem);
  const auto result = harness::tune(c, *problem, f.jobs);
  print_sweep(out, result.sweep);
  out << "best_a=" << num(result.best.tune_scale) << '\n'
      << "best_gamma=" << num(result.best.tune_scale / problem->smoothness()) << '\n';
  for (const auto& e : result.sweep) {
    if (e.a == result.best.tune_scale) out << "best_final_f=" << num(e.final_f) << '\n';
  }
  return kOk;
}

struct VerifyFlags {
  std::string trace;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err) {
  const harness::Trace trace = harness::import_trace(f.trace);
  ProblemSpec spec = trace.config.problem;
  const ProblemPtr problem = build_problem(spec);
  harness::VerificationReport report;
  try {
    report = harness::verify_bounds(trace, *problem);
  } catch (const VerificationRefused& e) {
    err << "verify: " << e.what() << '\n';
    out << "status=refused\n";
    return kVerificationFailed;
  }
  out << "bound=" << (report.kind == harness::BoundKind::convex ? "convex" : "nonconvex") << '\n';
  if (report.certificate) out << "certificate=" << num(*report.certificate) << '\n';
  for (const auto& c : report.checkpoints) {
    out << "K=" << c.K << " observed=" << num(c.observed) << " bound=" << num(c.bound)
        << " pass=" << (c.pass ? 1 : 0) << '\n';
  }
  const bool ok = report.all_pass();
  out << "status=" << (ok ? "pass" : "fail") << '\n';
  return ok ? kOk : kVerificationFailed;
}

struct ConstantsFlags {
  std::string betas;
  std::string gammas = "theory-ncvx";
  double L = 1.0;
  double mu = 0.0;
  std::optional<std::size_t> horizon;
};

int cmd_constants(const ConstantsFlags& f, std::ostream& out) {
  const std::vector<double> betas = parse_list(f.betas);
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) throw UsageError("momentum " + num(b) + " is outside [0, 1)");
  }
  if (!(f.L > 0.0 && std::isfinite(f.L))) throw UsageError("--L must be > 0");
  if (!(f.mu >= 0.0 && f.mu <= f.L)) throw UsageError("--mu must lie in [0, L]");

  const auto eff = theory::effective_betas(betas);
  const double g_ncvx = theory::stepsize_nonconvex(betas, f.L);
  const double g_cvx = theory::stepsize_convex(betas, f.L, f.mu);

  AggConfig cfg;
  if (f.gammas == "theory-ncvx") {
    cfg = AggConfig::uniform(betas, g_ncvx);
  } else if (f.gammas == "theory-cvx") {
    cfg = AggConfig::uniform(betas, g_cvx);
  } else {
    cfg.betas = betas;
    cfg.gammas = parse_list(f.gammas);
    if (cfg.gammas.size() == 1) cfg.gammas.assign(betas.size(), cfg.gammas[0]);
  }
  cfg.validate();
  const auto k = theory::constants(cfg, f.horizon);

  out << "m=" << k.m << '\n'
      << "betas=" << join(cfg.betas) << '\n'
      << "gammas=" << join(cfg.gammas) << '\n'
      << "L=" << num(f.L) << '\n'
      << "mu=" << num(f.mu) << '\n'
      << "A=" << num(k.A) << '\n'
      << "B=" << num(k.B) << '\n'
      << "C=" << num(k.C) << '\n'
      << "D=" << num(k.D) << '\n'
      << "E=" << num(k.E) << '\n'
      << "F=" << num(k.F) << '\n'
      << "beta_tilde=" << num(eff.beta_tilde) << '\n'
      << "beta_hat=" << num(eff.beta_hat) << '\n'
      << "beta_max=" << num(eff.beta_max) << '\n'
      << "gamma_theory_ncvx=" << num(g_ncvx) << '\n'
      << "gamma_theory_cvx=" << num(g_cvx) << '\n';

  const auto ncvx = theory::check_nonconvex_condition(k, f.L);
  const char* status = ncvx.status == theory::Admissibility::admissible     ? "PASS"
                       : ncvx.status == theory::Admissibility::inadmissible ? "FAIL"
                                                                            : "VACUOUS";
  out << "condition.nonconvex_margin=" << num(ncvx.margin) << ' ' << status << '\n';
  for (const auto& c : theory::check_convex_conditions(cfg, f.L, f.mu, f.horizon).conditions) {
    out << "condition." << c.name << " lhs=" << num(c.lhs) << " rhs=" << num(c.rhs)
        << " margin=" << num(c.margin()) << ' ' << (c.pass ? "PASS" : "FAIL") << '\n';
  }
  return kOk;
}

struct ParseCheckFlags {
  std::string path;
};

int cmd_parse_check(const ParseCheckFlags& f, std::ostream& out) {
  const auto parsed = libsvm::parse_file(resolve_dataset(f.path));
  std::size_t nnz = 0;
  std::map<double, std::size_t> labels;
  for (const auto& r : parsed.records) {
    nnz += r.entries.size();
    ++labels[r.label];
  }
  out << "records=" << parsed.records.size() << '\n'
      << "features=" << parsed.max_index << '\n'
      << "nonzeros=" << nnz << '\n'
      << "reordered_records=" << parsed.reordered_records << '\n';
  for (const auto& [label, count] : labels) out << "label." << num(label) << '=' << count << '\n';
  if (!parsed.records.empty()) {
    bool binary = true;
    try {
      libsvm::to_dataset(parsed.records);
    } catch (const std::invalid_argument&) {
      binary = false;
    }
    out << "binary=" << (binary ? 1 : 0) << '\n';
  }
  return kOk;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) throw std::invalid_argument("empty list");
  std::string_view rest(text);
  for (;;) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw std::invalid_argument("malformed number '" + std::string(item) + "' in list '" +
                                  text + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::filesystem::path resolve_dataset(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name)) return name;
  if (const char* dir = std::getenv("AGGHB_DATA_DIR"); dir != nullptr && *dir != '\0') {
    for (const fs::path& p : {fs::path(dir) / name, fs::path(dir) / (name + ".gz")}) {
      if (fs::is_regular_file(p)) return p;
    }
  }
  throw std::runtime_error("dataset '" + name + "' not found (set AGGHB_DATA_DIR or pass a path)");
}

Dataset load_dataset(const std::string& name, std::size_t dim) {
  const std::optional<std::size_t> override = dim > 0 ? std::optional(dim) : std::nullopt;
  if (name == kSyntheticData) {
    Dataset d = libsvm::synthetic(kSyntheticRows, kSyntheticCols, kSyntheticSeed);
    if (override && *override != d.dim()) {
      throw std::invalid_argument("the synthetic dataset has " + std::to_string(d.dim()) +
                                  " features");
    }
    return d;
  }
  return libsvm::load(resolve_dataset(name), std::nullopt, override);
}

ProblemPtr build_problem(ProblemSpec& spec) {
  if (spec.id == "quadratic") {
    if (spec.dim == 0) throw std::invalid_argument("quadratic: dimension must be >= 1");
    const Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(spec.dim),
                                                            1.0, static_cast<double>(spec.dim));
    return make_quadratic(diag.asDiagonal().toDenseMatrix(),
                          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim)));
  }
  if (spec.id == "rosenbrock") {
    spec.dim = 2;
    return make_rosenbrock();
  }
  if (spec.id == "logreg-l2" || spec.id == "logreg-ncvx") {
    if (spec.data != kSyntheticData) spec.data = resolve_dataset(spec.data).string();
    const Dataset data = load_dataset(spec.data, spec.dim);
    spec.dim = data.dim();
    if (spec.id == "logreg-l2") {
      if (spec.l2 < 0.0) spec.l2 = kDefaultL2Ratio * logistic_base_smoothness(data);
      return make_logreg_l2(data, spec.l2);
    }
    if (spec.lambda < 0.0) spec.lambda = kDefaultLambdaRatio * logistic_base_smoothness(data);
    return make_logreg_nonconvex(data, spec.lambda);
  }
  throw std::invalid_argument("unknown problem '" + spec.id + "'");
}

std::vector<double> default_x0(const ProblemSpec& spec, std::size_t dim, std::uint64_t seed) {
  if (spec.id == "rosenbrock") return {-2.0, 2.0};
  std::vector<double> x(dim, 0.0);
  if (spec.id == "quadratic") {
    std::mt19937_64 gen(seed);
    for (double& v : x) v = static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
  }
  return x;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aggregated heavy-ball experiments: run, tune, verify, inspect."};
  app.name("agghb");
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run one optimizer on one problem and write a trace");
  add_problem_flags(run, run_flags);
  run->add_option("--gammas", run_flags.gammas,
                  "Stepsize list, or theory-ncvx | theory-cvx | tune");
  run->add_option("--out", run_flags.out, "Trace CSV path (metadata goes to <out>.meta.json)");

  RunFlags tune_flags;
  auto* tune = app.add_subcommand("tune", "Sweep gamma = a/L over a = 2^-6 .. 2^8");
  add_problem_flags(tune, tune_flags);

  VerifyFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "Check a theory-stepsize trace against its bound");
  verify->add_option("trace", verify_flags.trace, "Trace CSV written by 'run'")->required();

  ConstantsFlags constants_flags;
  auto* constants = app.add_subcommand("constants", "Print theory constants and stepsizes");
  constants->add_option("--betas", constants_flags.betas, "Momentum list")->required();
  constants->add_option("--gammas", constants_flags.gammas,
                        "Stepsize list, or theory-ncvx | theory-cvx");
  constants->add_option("--L", constants_flags.L, "Smoothness constant");
  constants->add_option("--mu", constants_flags.mu, "Strong convexity constant");
  constants->add_option("--horizon", constants_flags.horizon, "Iteration count K used in B");

  ParseCheckFlags parse_flags;
  auto* parse_check = app.add_subcommand("parse-check", "Parse a LIBSVM file and summarize it");
  parse_check->add_option("path", parse_flags.path, "File (or name under AGGHB_DATA_DIR)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kUsageOrIo;
  }

  try {
    if (*run) return cmd_run(run_flags, out);
    if (*tune) return cmd_tune(tune_flags, out);
    if (*verify) return cmd_verify(verify_flags, out, err);
    if (*constants) return cmd_constants(constants_flags, out);
    if (*parse_check) return cmd_parse_check(parse_flags, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kUsageOrIo;
  } catch (const harness::TuningFailed& e) {
    print_sweep(out, e.sweep());
    err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }
  return kUsageOrIo;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace agghb::cli
