#include "agghb/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace agghb::theory {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_betas(std::span<const double> betas) {
  if (betas.empty()) throw std::invalid_argument("need at least one momentum");
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  }
}

void require_positive_L(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("L must be finite and > 0");
}

bool le_with_slack(double lhs, double rhs) {
  return lhs <= rhs + kConditionSlack * std::abs(rhs);
}

}  // namespace

TheoryConstants constants(const AggConfig& config, std::optional<std::size_t> horizon) {
  config.validate();
  TheoryConstants c;
  c.m = config.m();
  const double inv_m = 1.0 / static_cast<double>(c.m);
  for (std::size_t i = 0; i < c.m; ++i) {
    const double b = config.betas[i];
    const double g = config.gammas[i];
    const double gap = 1.0 - b;
    c.A += b * g / gap;
    c.C += g / (gap * gap);
    c.D = std::max(c.D, g / gap);
    c.E += 1.0 / gap;
    c.F += g / gap;
    // 1 - beta^{K+1}; the open-horizon cap replaces it with 1.
    double tail = 1.0;
    if (horizon && b > 0.0) {
      tail = -std::expm1(static_cast<double>(*horizon + 1) * std::log(b));
    }
    c.B += b * g * tail / (gap * gap);
  }
  c.A *= inv_m;
  c.F *= inv_m;
  c.B *= inv_m;
  return c;
}

EffectiveBetas effective_betas(std::span<const double> betas) {
  require_betas(betas);
  const double m = static_cast<double>(betas.size());
  double s = 0.0;        // mean beta / (1 - beta)^2
  double mean_inv = 0.0; // mean 1 / (1 - beta)
  EffectiveBetas out;
  for (double b : betas) {
    const double gap = 1.0 - b;
    s += b / (gap * gap);
    mean_inv += 1.0 / gap;
    out.beta_max = std::max(out.beta_max, b);
  }
  s /= m;
  mean_inv /= m;

  out.hat_gap = 1.0 / mean_inv;
  out.beta_hat = 1.0 - out.hat_gap;

  // Smaller root of s b^2 - (2s + 1) b + s = 0, written as 2s / (larger
  // numerator) so that s -> 0 gives 0 without a division by s.
  const double r = std::sqrt(4.0 * s + 1.0);
  const double denom = 2.0 * s + 1.0 + r;
  out.beta_tilde = s == 0.0 ? 0.0 : 2.0 * s / denom;
  out.tilde_gap = (1.0 + r) / denom;

  // Both defining maps are increasing, so the exact values lie in
  // [min beta, max beta]; clamp away rounding. Equal momenta (in particular
  // m = 1) then reproduce the input exactly.
  const auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
  out.beta_hat = std::clamp(out.beta_hat, *lo, *hi);
  out.beta_tilde = std::clamp(out.beta_tilde, *lo, *hi);
  out.hat_gap = std::clamp(out.hat_gap, 1.0 - *hi, 1.0 - *lo);
  out.tilde_gap = std::clamp(out.tilde_gap, 1.0 - *hi, 1.0 - *lo);
  return out;
}

NonconvexVerdict check_nonconvex_condition(const TheoryConstants& consts, double L) {
  require_positive_L(L);
  const double m = static_cast<double>(consts.m);
  NonconvexVerdict v;
  v.margin = 1.0 - consts.C * consts.D * consts.E * L * L / (m * m) - L * consts.A;
  if (consts.A == 0.0) {
    v.status = Admissibility::vacuous;
  } else {
    v.status = v.margin > 0.0 ? Admissibility::admissible : Admissibility::inadmissible;
  }
  return v;
}

double stepsize_nonconvex(std::span<const double> betas, double L) {
  require_betas(betas);
  require_positive_L(L);
  const EffectiveBetas eff = effective_betas(betas);
  // beta_hat / (1 - beta_hat) and beta_tilde / (1 - beta_tilde)^2 from their
  // defining averages rather than from the rounded betas.
  double mean_ratio = 0.0;
  double mean_inv = 0.0;
  for (double b : betas) {
    const double gap = 1.0 - b;
    mean_ratio += b / (gap * gap);
    mean_inv += 1.0 / gap;
  }
  const double m = static_cast<double>(betas.size());
  mean_ratio /= m;
  mean_inv /= m;
  const double linear = 2.0 * (mean_inv - 1.0);
  const double quad = (mean_ratio + mean_inv) * mean_inv / (1.0 - eff.beta_max);
  return 1.0 / (L * (linear + std::sqrt(2.0 * quad)));
}

double stepsize_convex(std::span<const double> betas, double L, double mu) {
  require_betas(betas);
  require_positive_L(L);
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  const EffectiveBetas eff = effective_betas(betas);
  const double max_gap = 1.0 - eff.beta_max;

  const double by_mu = mu > 0.0 ? max_gap * max_gap / (2.0 * mu) : kInf;
  const double by_L = eff.hat_gap / (4.0 * L);
  const double by_memory =
      eff.beta_tilde > 0.0
          ? eff.tilde_gap * std::sqrt(eff.hat_gap * max_gap) /
                (4.0 * std::sqrt(3.0) * L * std::sqrt(eff.beta_tilde))
          : kInf;
  return std::min({by_mu, by_L, by_memory});
}

bool ConvexVerdict::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const Condition& c) { return c.pass; });
}

ConvexVerdict check_convex_conditions(const AggConfig& config, double L, double mu,
                                      std::optional<std::size_t> horizon) {
  require_positive_L(L);
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  const TheoryConstants c = constants(config, horizon);
  const double beta_max = *std::max_element(config.betas.begin(), config.betas.end());
  const double max_gap = 1.0 - beta_max;

  ConvexVerdict out;
  auto add = [&](std::string name, double lhs, double rhs) {
    out.conditions.push_back({std::move(name), lhs, rhs, le_with_slack(lhs, rhs)});
  };
  if (mu > 0.0) {
    for (std::size_t i = 0; i < config.m(); ++i) {
      add("gamma_" + std::to_string(i + 1) + "_vs_mu", config.gammas[i],
          max_gap * (1.0 - config.betas[i]) / (2.0 * mu));
    }
  }
  add("F_vs_L", c.F, 1.0 / (4.0 * L));
  add("BF_vs_L2", c.B * c.F, max_gap / (48.0 * L * L));
  return out;
}

double bound_nonconvex(std::size_t K, const BoundInputs& inputs,
                       const TheoryConstants& consts) {
  if (K == 0) throw std::invalid_argument("bound_nonconvex: K must be >= 1");
  const NonconvexVerdict v = check_nonconvex_condition(consts, inputs.L);
  if (v.status != Admissibility::admissible) {
    throw std::invalid_argument("bound_nonconvex: stepsizes are not admissible");
  }
  return 2.0 / static_cast<double>(K) * inputs.delta0 / (consts.A * v.margin);
}

double bound_convex(std::size_t K, const BoundInputs& inputs, double F) {
  if (!(F > 0.0)) throw std::invalid_argument("bound_convex: F must be > 0");
  const double q = inputs.mu * F / 2.0;
  if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("bound_convex: need mu F / 2 < 1");
  const double scale = 4.0 * inputs.r0_sq / F;
  if (inputs.mu > 0.0) return std::pow(1.0 - q, static_cast<double>(K)) * scale;
  if (K == 0) throw std::invalid_argument("bound_convex: K must be >= 1 when mu = 0");
  return scale / static_cast<double>(K);
}

}  // namespace agghb::theory
