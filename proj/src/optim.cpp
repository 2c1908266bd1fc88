#include "agghb/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "agghb/error.hpp"
#include "agghb/simd.hpp"

namespace agghb {
namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(got) + ", expected " +
                                std::to_string(expected));
  }
}

}  // namespace

void AggConfig::validate() const {
  if (betas.empty()) throw std::invalid_argument("AggConfig: need at least one momentum");
  if (betas.size() != gammas.size()) {
    throw std::invalid_argument("AggConfig: " + std::to_string(betas.size()) +
                                " betas but " + std::to_string(gammas.size()) +
                                " gammas");
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0.0 && betas[i] < 1.0)) {
      throw std::invalid_argument("AggConfig: beta[" + std::to_string(i) +
                                  "] must lie in [0, 1)");
    }
    if (!(gammas[i] > 0.0) || !std::isfinite(gammas[i])) {
      throw std::invalid_argument("AggConfig: gamma[" + std::to_string(i) +
                                  "] must be finite and positive");
    }
  }
}

AggConfig AggConfig::uniform(std::vector<double> betas, double gamma) {
  AggConfig c;
  c.gammas.assign(betas.size(), gamma);
  c.betas = std::move(betas);
  return c;
}

OptimizerState init(AggConfig config, std::span<const double> x0) {
  config.validate();
  if (!all_finite(x0)) throw std::invalid_argument("init: x0 is not finite");
  OptimizerState s;
  s.x.assign(x0.begin(), x0.end());
  s.buffers.assign(config.m(), std::vector<double>(x0.size(), 0.0));
  s.config = std::move(config);
  return s;
}

void step(OptimizerState& state, std::span<const double> grad) {
  require_dim(state.dim(), grad.size(), "step");
  if (!all_finite(grad)) {
    throw DivergenceError("non-finite gradient at iteration " + std::to_string(state.k),
                          state.x, state.k);
  }
  std::vector<double> previous = state.x;
  // The kernels write x and the buffers while reading grad.
  std::vector<double> grad_copy;
  const auto overlaps = [&](const std::vector<double>& v) {
    return grad.data() < v.data() + v.size() && v.data() < grad.data() + grad.size();
  };
  bool aliased = overlaps(state.x);
  for (const auto& v : state.buffers) aliased = aliased || overlaps(v);
  if (aliased) {
    grad_copy.assign(grad.begin(), grad.end());
    grad = grad_copy;
  }
  const auto& kern = simd::kernels();
  const double inv_m = 1.0 / static_cast<double>(state.config.m());
  for (std::size_t i = 0; i < state.config.m(); ++i) {
    kern.momentum_step(state.config.betas[i], state.config.gammas[i] * inv_m,
                       grad.data(), state.buffers[i].data(), state.x.data(),
                       state.dim());
  }
  bool finite = all_finite(state.x);
  for (const auto& v : state.buffers) finite = finite && all_finite(v);
  if (!finite) {
    throw DivergenceError("iterate left the finite range at iteration " +
                              std::to_string(state.k + 1),
                          std::move(previous), state.k);
  }
  ++state.k;
}

std::vector<double> virtual_iterate(const OptimizerState& state) {
  std::vector<double> out = state.x;
  const double inv_m = 1.0 / static_cast<double>(state.config.m());
  for (std::size_t i = 0; i < state.config.m(); ++i) {
    const double b = state.config.betas[i];
    const double c = b * state.config.gammas[i] / (1.0 - b) * inv_m;
    if (c != 0.0) simd::axpy(-c, state.buffers[i], out);
  }
  return out;
}

double virtual_stepsize(const AggConfig& config) {
  double sum = 0.0;
  for (std::size_t i = 0; i < config.m(); ++i) sum += config.gammas[i] / (1.0 - config.betas[i]);
  return sum / static_cast<double>(config.m());
}

std::vector<double> momentum_expansion(std::span<const std::vector<double>> history,
                                       double beta) {
  if (history.empty()) throw std::invalid_argument("momentum_expansion: empty history");
  const std::size_t n = history.front().size();
  std::vector<double> out(n, 0.0);
  double weight = 1.0;
  // Newest gradient first: weight beta^l multiplies g_{k-l}.
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    require_dim(n, it->size(), "momentum_expansion");
    for (std::size_t j = 0; j < n; ++j) out[j] += weight * (*it)[j];
    weight *= beta;
  }
  return out;
}

HeavyBallState heavy_ball_init(double beta, double gamma, std::span<const double> x0) {
  AggConfig{{beta}, {gamma}}.validate();
  if (!all_finite(x0)) throw std::invalid_argument("heavy_ball_init: x0 is not finite");
  HeavyBallState s;
  s.x.assign(x0.begin(), x0.end());
  s.v.assign(x0.size(), 0.0);
  s.beta = beta;
  s.gamma = gamma;
  return s;
}

void heavy_ball_step(HeavyBallState& state, std::span<const double> grad) {
  require_dim(state.x.size(), grad.size(), "heavy_ball_step");
  std::vector<double> previous = state.x;
  bool finite = true;
  for (std::size_t j = 0; j < state.x.size(); ++j) {
    state.v[j] = state.beta * state.v[j] + grad[j];
    state.x[j] = state.x[j] - state.gamma * state.v[j];
    finite = finite && std::isfinite(state.x[j]) && std::isfinite(state.v[j]);
  }
  if (!finite) {
    throw DivergenceError("heavy ball diverged at iteration " + std::to_string(state.k + 1),
                          std::move(previous), state.k);
  }
  ++state.k;
}

void gradient_descent_step(std::vector<double>& x, double gamma,
                           std::span<const double> grad) {
  require_dim(x.size(), grad.size(), "gradient_descent_step");
  std::vector<double> previous = x;
  simd::axpy(-gamma, grad, x);
  if (!all_finite(x)) {
    throw DivergenceError("gradient descent diverged", std::move(previous), 0);
  }
}

AveragingState::AveragingState(double rho) : rho_(rho) {
  if (!(rho >= 1.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("AveragingState: weight ratio must be finite and >= 1");
  }
}

AveragingState AveragingState::for_contraction(double mu, double F) {
  const double q = mu * F / 2.0;
  if (!(q >= 0.0 && q < 1.0)) {
    throw std::invalid_argument("AveragingState: need 0 <= mu F / 2 < 1");
  }
  return AveragingState(1.0 / (1.0 - q));
}

void AveragingState::add(std::span<const double> x) {
  if (count_ == 0) {
    mean_.assign(x.begin(), x.end());
    normalized_weight_ = 1.0;
  } else {
    require_dim(mean_.size(), x.size(), "AveragingState::add");
    normalized_weight_ = normalized_weight_ / rho_ + 1.0;
    const double t = 1.0 / normalized_weight_;
    for (std::size_t j = 0; j < mean_.size(); ++j) mean_[j] += t * (x[j] - mean_[j]);
  }
  ++count_;
}

}  // namespace agghb
