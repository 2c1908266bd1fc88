#pragma once

// Heavy-ball family of first-order methods, driven by caller-supplied
// gradients.
//
// AggHB keeps m momentum buffers V^(i) with their own momentum beta_i and
// stepsize gamma_i:
//
//   V^(i) <- beta_i V^(i) + grad f(x_k)
//   x     <- x - (1/m) sum_i gamma_i V^(i)
//
// With m = 1 this is the classical heavy-ball method; with every beta_i = 0 it
// is gradient descent with stepsize (1/m) sum_i gamma_i.
//
// Buffers start at zero, so the first step uses V^(i) = grad f(x_0) for all i
// and x_1 = x_0 - mean(gamma) * grad f(x_0).

#include <cstddef>
#include <span>
#include <vector>

namespace agghb {

struct AggConfig {
  std::vector<double> betas;
  std::vector<double> gammas;

  std::size_t m() const { return betas.size(); }

  /// Throws std::invalid_argument unless m >= 1, the two vectors have equal
  /// length, every beta is in [0, 1) and every gamma is finite and > 0.
  void validate() const;

  /// Same stepsize for every buffer.
  static AggConfig uniform(std::vector<double> betas, double gamma);
};

struct OptimizerState {
  std::vector<double> x;
  std::vector<std::vector<double>> buffers;  // V^(i), one per momentum
  std::size_t k = 0;
  AggConfig config;

  std::size_t dim() const { return x.size(); }
};

/// Fresh state at x0 with zero buffers and k = 0.
OptimizerState init(AggConfig config, std::span<const double> x0);

/// One AggHB iteration using grad = grad f(state.x). `grad` may alias the
/// state's own vectors.
///
/// Throws DivergenceError if the gradient or the updated state is not finite;
/// the error carries the last finite iterate. The state is unspecified after
/// such a throw.
void step(OptimizerState& state, std::span<const double> grad);

/// x~_k = x_k - (1/m) sum_i beta_i gamma_i / (1 - beta_i) V^(i), where the
/// buffers hold V_{k-1}. Satisfies x~_{k+1} = x~_k - F grad f(x_k) with
/// F = (1/m) sum_i gamma_i / (1 - beta_i).
std::vector<double> virtual_iterate(const OptimizerState& state);

/// F = (1/m) sum_i gamma_i / (1 - beta_i): the stepsize of the virtual
/// iterates' gradient recursion.
double virtual_stepsize(const AggConfig& config);

/// sum_{l=0}^{k} beta^l g_{k-l} for history = [g_0, ..., g_k]. This is what a
/// buffer with momentum beta holds after k+1 steps from zero.
std::vector<double> momentum_expansion(std::span<const std::vector<double>> history,
                                       double beta);

// Single-buffer heavy ball written directly from its two-line recurrence,
// without the shared kernels. Used as the reference the aggregated method must
// reduce to.
struct HeavyBallState {
  std::vector<double> x;
  std::vector<double> v;
  double beta = 0.0;
  double gamma = 0.0;
  std::size_t k = 0;
};

HeavyBallState heavy_ball_init(double beta, double gamma, std::span<const double> x0);
void heavy_ball_step(HeavyBallState& state, std::span<const double> grad);

/// x <- x - gamma * grad. Throws DivergenceError on a non-finite result.
void gradient_descent_step(std::vector<double>& x, double gamma,
                           std::span<const double> grad);

/// Online weighted mean of iterates with weights w_k proportional to rho^k.
///
/// Stores the mean and S_k = W_k / w_k = sum_{j<=k} rho^{j-k}, which obeys
/// S_k = S_{k-1} / rho + 1 and stays below rho / (rho - 1). No raw weight is
/// ever formed, so long runs cannot overflow.
class AveragingState {
 public:
  /// Throws std::invalid_argument unless rho is finite and >= 1.
  explicit AveragingState(double rho);

  /// rho = 1 / (1 - mu F / 2). Requires 0 <= mu F / 2 < 1.
  static AveragingState for_contraction(double mu, double F);

  void add(std::span<const double> x);

  const std::vector<double>& mean() const { return mean_; }
  double rho() const { return rho_; }
  double normalized_weight() const { return normalized_weight_; }
  std::size_t count() const { return count_; }

 private:
  double rho_;
  double normalized_weight_ = 0.0;
  std::size_t count_ = 0;
  std::vector<double> mean_;
};

}  // namespace agghb
