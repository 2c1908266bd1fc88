#include "agghb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "agghb/error.hpp"
#include "agghb/simd.hpp"

namespace agghb::harness {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::gd:
      return "gd";
    case OptimizerKind::hb:
      return "hb";
    case OptimizerKind::agghb:
      return "agghb";
  }
  return "unknown";
}

std::string to_string(StepsizeSource source) {
  switch (source) {
    case StepsizeSource::explicit_values:
      return "explicit";
    case StepsizeSource::theory_nonconvex:
      return "theory-ncvx";
    case StepsizeSource::theory_convex:
      return "theory-cvx";
    case StepsizeSource::tuned:
      return "tuned";
  }
  return "unknown";
}

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "gd") return OptimizerKind::gd;
  if (s == "hb") return OptimizerKind::hb;
  if (s == "agghb") return OptimizerKind::agghb;
  throw std::invalid_argument("unknown optimizer kind: " + s);
}

StepsizeSource parse_stepsize_source(const std::string& s) {
  if (s == "explicit") return StepsizeSource::explicit_values;
  if (s == "theory-ncvx") return StepsizeSource::theory_nonconvex;
  if (s == "theory-cvx") return StepsizeSource::theory_convex;
  if (s == "tuned") return StepsizeSource::tuned;
  throw std::invalid_argument("unknown stepsize source: " + s);
}

void RunConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("run: iteration budget must be >= 1");
  if (x0.empty()) throw std::invalid_argument("run: empty starting point");
  const auto& betas = optimizer.betas;
  if (betas.empty()) throw std::invalid_argument("run: need at least one momentum");
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("run: momentum must lie in [0, 1)");
  }
  if (kind == OptimizerKind::gd && (betas.size() != 1 || betas[0] != 0.0)) {
    throw std::invalid_argument("run: gradient descent takes a single zero momentum");
  }
  if (kind == OptimizerKind::hb && betas.size() != 1) {
    throw std::invalid_argument("run: heavy ball takes exactly one momentum");
  }
  if (source == StepsizeSource::explicit_values) optimizer.validate();
  if (source == StepsizeSource::tuned && !(tune_scale > 0.0 && std::isfinite(tune_scale))) {
    throw std::invalid_argument("run: tuned stepsize needs a positive scale a");
  }
}

AggConfig resolve_stepsizes(const RunConfig& config, const Problem& problem) {
  config.validate();
  const auto& betas = config.optimizer.betas;
  double gamma = 0.0;
  switch (config.source) {
    case StepsizeSource::explicit_values:
      return config.optimizer;
    case StepsizeSource::theory_nonconvex:
      gamma = theory::stepsize_nonconvex(betas, problem.smoothness());
      break;
    case StepsizeSource::theory_convex:
      gamma = theory::stepsize_convex(betas, problem.smoothness(), problem.strong_convexity());
      break;
    case StepsizeSource::tuned:
      gamma = config.tune_scale / problem.smoothness();
      break;
  }
  AggConfig out = AggConfig::uniform(betas, gamma);
  out.validate();
  return out;
}

namespace {

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(s);
}

// One of the three methods behind a common face.
class Stepper {
 public:
  Stepper(OptimizerKind kind, const AggConfig& cfg, std::span<const double> x0) : kind_(kind) {
    switch (kind) {
      case OptimizerKind::gd:
        gd_x_.assign(x0.begin(), x0.end());
        gd_gamma_ = cfg.gammas[0];
        break;
      case OptimizerKind::hb:
        hb_ = heavy_ball_init(cfg.betas[0], cfg.gammas[0], x0);
        break;
      case OptimizerKind::agghb:
        agg_ = init(cfg, x0);
        break;
    }
  }

  const std::vector<double>& x() const {
    switch (kind_) {
      case OptimizerKind::gd:
        return gd_x_;
      case OptimizerKind::hb:
        return hb_.x;
      case OptimizerKind::agghb:
        break;
    }
    return agg_.x;
  }

  void advance(std::span<const double> grad) {
    switch (kind_) {
      case OptimizerKind::gd:
        gradient_descent_step(gd_x_, gd_gamma_, grad);
        return;
      case OptimizerKind::hb:
        heavy_ball_step(hb_, grad);
        return;
      case OptimizerKind::agghb:
        step(agg_, grad);
        return;
    }
  }

  std::vector<double> virtual_point() const {
    switch (kind_) {
      case OptimizerKind::gd:
        return gd_x_;
      case OptimizerKind::hb: {
        std::vector<double> out = hb_.x;
        const double c = hb_.beta * hb_.gamma / (1.0 - hb_.beta);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] -= c * hb_.v[j];
        return out;
      }
      case OptimizerKind::agghb:
        break;
    }
    return virtual_iterate(agg_);
  }

 private:
  OptimizerKind kind_;
  std::vector<double> gd_x_;
  double gd_gamma_ = 0.0;
  HeavyBallState hb_;
  OptimizerState agg_;
};

}  // namespace

Trace run(const RunConfig& config, const Problem& problem) {
  const auto started = std::chrono::steady_clock::now();
  Trace trace;
  trace.config = config;
  trace.resolved = resolve_stepsizes(config, problem);
  trace.constants = theory::constants(trace.resolved, config.iterations);
  trace.L = problem.smoothness();
  trace.mu = problem.strong_convexity();
  if (config.x0.size() != problem.dim()) {
    throw std::invalid_argument("run: x0 has dimension " + std::to_string(config.x0.size()) +
                                ", problem has " + std::to_string(problem.dim()));
  }

  const double F = trace.constants.F;
  const double q = trace.mu * F / 2.0;
  // Outside 0 <= q < 1 no weighting is theoretically meaningful; use the plain mean.
  trace.averaging_rho = (q >= 0.0 && q < 1.0) ? 1.0 / (1.0 - q) : 1.0;
  AveragingState average(trace.averaging_rho);

  const auto& optimum = problem.info().optimum;
  Stepper stepper(config.kind, trace.resolved, config.x0);
  std::vector<double> grad(problem.dim());
  double max_residual = 0.0;
  trace.points.reserve(config.iterations + 1);

  for (std::size_t k = 0; k <= config.iterations; ++k) {
    const std::vector<double>& x = stepper.x();
    TracePoint p;
    p.k = k;
    p.f = problem.value_and_gradient(x, grad);
    p.grad_norm = std::sqrt(simd::squared_norm(grad));
    if (!std::isfinite(p.f) || !std::isfinite(p.grad_norm) || !finite_all(grad)) {
      trace.diverged = true;
      break;
    }
    if (optimum) p.dist_opt = distance(x, optimum->x);
    if (config.track_average) {
      average.add(x);
      const double fa = problem.value(average.mean());
      if (!std::isfinite(fa)) {
        trace.diverged = true;
        break;
      }
      p.f_avg = fa;
    }
    trace.points.push_back(p);
    if (k == config.iterations) break;

    std::vector<double> before;
    if (config.track_virtual_recursion) before = stepper.virtual_point();
    try {
      stepper.advance(grad);
    } catch (const DivergenceError&) {
      trace.diverged = true;
      break;
    }
    if (config.track_virtual_recursion) {
      const std::vector<double> after = stepper.virtual_point();
      double res = 0.0;
      for (std::size_t j = 0; j < after.size(); ++j) {
        const double d = after[j] - before[j] + F * grad[j];
        res += d * d;
      }
      max_residual = std::max(max_residual,
                              std::sqrt(res) / (1.0 + std::sqrt(simd::squared_norm(before))));
    }
  }
  if (config.track_virtual_recursion) trace.max_recursion_residual = max_residual;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return trace;
}

std::vector<double> tuning_grid() {
  std::vector<double> grid;
  for (int e = -6; e <= 8; ++e) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

TuneResult tune(const RunConfig& base, const Problem& problem, unsigned jobs) {
  const std::vector<double> grid = tuning_grid();
  std::vector<TuneEntry> sweep(grid.size());
  std::vector<RunConfig> configs(grid.size(), base);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    configs[i].source = StepsizeSource::tuned;
    configs[i].tune_scale = grid[i];
    configs[i].validate();
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      const Trace t = run(configs[i], problem);
      sweep[i] = {grid[i], t.points.empty() ? NAN : t.points.back().f, t.diverged};
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i].diverged) continue;
    if (!best || sweep[i].final_f < sweep[*best].final_f) best = i;
  }
  if (!best) throw TuningFailed("tune: every stepsize in the grid diverged", std::move(sweep));
  return TuneResult{configs[*best], std::move(sweep)};
}

ReferenceSolution reference_solution(const Problem& problem, double tol,
                                     std::size_t max_iterations) {
  if (!problem.convex()) {
    throw std::invalid_argument("reference_solution: " + problem.name() +
                                " is not convex; use its known optimum instead");
  }
  ReferenceSolution out;
  if (const auto& opt = problem.info().optimum) {
    out.x = opt->x;
    out.f = opt->f;
    out.grad_norm = std::sqrt(simd::squared_norm(problem.gradient(out.x)));
    out.closed_form = true;
    return out;
  }
  out.x.assign(problem.dim(), 0.0);
  std::vector<double> g(problem.dim());
  const double step = 1.0 / problem.smoothness();
  for (; out.iterations < max_iterations; ++out.iterations) {
    problem.gradient(out.x, g);
    if (std::sqrt(simd::squared_norm(g)) <= tol) break;
    simd::axpy(-step, g, out.x);
  }
  out.f = problem.value_and_gradient(out.x, g);
  out.grad_norm = std::sqrt(simd::squared_norm(g));
  return out;
}

bool VerificationReport::all_pass() const {
  return std::all_of(checkpoints.begin(), checkpoints.end(),
                     [](const Checkpoint& c) { return c.pass; });
}

std::vector<std::size_t> checkpoint_schedule(std::size_t budget) {
  std::vector<std::size_t> out;
  for (std::size_t K = 10; K <= budget; K *= 10) out.push_back(K);
  if (budget >= 1 && (out.empty() || out.back() != budget)) out.push_back(budget);
  return out;
}

VerificationReport verify_bounds(const Trace& trace, const Problem& problem,
                                 const std::optional<ReferenceSolution>& reference) {
  const StepsizeSource source = trace.config.source;
  if (source != StepsizeSource::theory_nonconvex && source != StepsizeSource::theory_convex) {
    throw VerificationRefused("bounds only hold for theoretical stepsizes; this trace used '" +
                              to_string(source) + "'");
  }
  if (trace.points.empty()) throw std::invalid_argument("verify_bounds: empty trace");
  const std::size_t last = trace.points.back().k;

  VerificationReport report;
  theory::BoundInputs in;
  in.L = problem.smoothness();
  in.mu = problem.strong_convexity();

  if (source == StepsizeSource::theory_nonconvex) {
    report.kind = BoundKind::nonconvex;
    const auto& lb = problem.info().lower_bound;
    if (!lb) throw std::invalid_argument("verify_bounds: problem has no known lower bound");
    in.delta0 = trace.points.front().f - *lb;
    const theory::TheoryConstants consts = theory::constants(trace.resolved);
    double running_min = INFINITY;
    std::size_t next = 1;
    for (std::size_t K : checkpoint_schedule(trace.config.iterations)) {
      if (K > last) break;
      for (; next <= K; ++next) {
        const double g = trace.points[next].grad_norm;
        running_min = std::min(running_min, g * g);
      }
      const double bound = theory::bound_nonconvex(K, in, consts);
      report.checkpoints.push_back({K, running_min, bound, running_min <= bound});
    }
    return report;
  }

  report.kind = BoundKind::convex;
  const ReferenceSolution ref = reference ? *reference : reference_solution(problem);
  report.certificate = ref.grad_norm;
  const double d = distance(trace.config.x0, ref.x);
  in.r0_sq = d * d;
  const double F = theory::constants(trace.resolved).F;
  for (std::size_t K : checkpoint_schedule(trace.config.iterations)) {
    if (K > last) break;
    const auto& fa = trace.points[K].f_avg;
    if (!fa) throw std::invalid_argument("verify_bounds: trace has no averaged objective");
    const double observed = *fa - ref.f;
    const double bound = theory::bound_convex(K, in, F);
    report.checkpoints.push_back({K, observed, bound, observed <= bound + 2.0 * ref.grad_norm});
  }
  return report;
}

}  // namespace agghb::harness
