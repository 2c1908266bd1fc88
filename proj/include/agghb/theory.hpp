#pragma once

// Stepsize rules, admissibility conditions and convergence bounds for the
// aggregated heavy-ball method. Everything here is a pure function of the
// momentum/stepsize vectors and the problem constants.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agghb/optim.hpp"

namespace agghb::theory {

struct TheoryConstants {
  double A = 0.0;  // (1/m) sum beta_i gamma_i / (1 - beta_i)
  double C = 0.0;  // sum gamma_i / (1 - beta_i)^2
  double D = 0.0;  // max gamma_i / (1 - beta_i)
  double E = 0.0;  // sum 1 / (1 - beta_i)
  double F = 0.0;  // (1/m) sum gamma_i / (1 - beta_i)
  double B = 0.0;  // (1/m) sum beta_i gamma_i (1 - beta_i^{K+1}) / (1 - beta_i)^2
  std::size_t m = 0;
};

/// `horizon` is the iteration count K used in B; without one, B takes its
/// K -> infinity value, which upper-bounds every finite horizon.
TheoryConstants constants(const AggConfig& config,
                          std::optional<std::size_t> horizon = std::nullopt);

/// Single momenta that reproduce the averaged quantities of a momentum set:
///   beta_tilde / (1 - beta_tilde)^2 = mean_i beta_i / (1 - beta_i)^2
///   1 / (1 - beta_hat)             = mean_i 1 / (1 - beta_i)
struct EffectiveBetas {
  double beta_tilde = 0.0;
  double beta_hat = 0.0;
  double beta_max = 0.0;
  // 1 - beta_tilde and 1 - beta_hat, evaluated without cancellation.
  double tilde_gap = 1.0;
  double hat_gap = 1.0;
};

EffectiveBetas effective_betas(std::span<const double> betas);

struct BoundInputs {
  double L = 1.0;
  double mu = 0.0;
  double delta0 = 0.0;  // f(x_0) - f_inf
  double r0_sq = 0.0;   // |x_0 - x_*|^2
};

enum class Admissibility { admissible, inadmissible, vacuous };

struct NonconvexVerdict {
  double margin = 0.0;  // 1 - C D E L^2 / m^2 - L A
  Admissibility status = Admissibility::inadmissible;
};

/// Evaluates the non-convex stepsize condition in its stricter form (the
/// CDEL^2/m^2 term without the factor 1/2). `vacuous` when A = 0, i.e. no
/// momentum at all, where the bound degenerates.
NonconvexVerdict check_nonconvex_condition(const TheoryConstants& consts, double L);

/// Uniform stepsize with nonconvex margin >= 1/2.
double stepsize_nonconvex(std::span<const double> betas, double L);

/// Uniform stepsize satisfying every convex/strongly convex condition. The
/// mu term drops out when mu = 0 and the beta_tilde term when beta_tilde = 0.
double stepsize_convex(std::span<const double> betas, double L, double mu);

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;

  double margin() const { return rhs - lhs; }
};

struct ConvexVerdict {
  std::vector<Condition> conditions;

  bool all_pass() const;
};

/// Relative slack for "lhs <= rhs" comparisons: the convex stepsize meets
/// one condition with equality, and its evaluation rounds either way.
inline constexpr double kConditionSlack = 1e-12;

/// Checks gamma_i <= (1 - beta_max)(1 - beta_i) / (2 mu) for each i (skipped
/// when mu = 0), F <= 1/(4L), and B F <= (1 - beta_max) / (48 L^2).
ConvexVerdict check_convex_conditions(const AggConfig& config, double L, double mu,
                                      std::optional<std::size_t> horizon = std::nullopt);

/// min_{1<=k<=K} |grad f(x_k)|^2 <= (2/K) delta0 / (A margin).
/// Throws std::invalid_argument if K = 0 or the constants are not admissible.
double bound_nonconvex(std::size_t K, const BoundInputs& inputs,
                       const TheoryConstants& consts);

/// f(xbar_K) - f(x_*) <= (1 - mu F / 2)^K 4 r0^2 / F   (mu > 0)
///                     <= 4 r0^2 / (F K)               (mu = 0)
/// Throws std::invalid_argument if mu F / 2 >= 1, or K = 0 with mu = 0.
double bound_convex(std::size_t K, const BoundInputs& inputs, double F);

}  // namespace agghb::theory
