#pragma once

// Smooth test objectives with analytic gradients and the constants the
// theory needs (smoothness L, strong convexity mu, a lower bound on f).

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agghb/feature_matrix.hpp"

namespace agghb {

struct Optimum {
  std::vector<double> x;
  double f = 0.0;
};

struct ProblemInfo {
  std::string name;
  std::size_t dim = 0;
  double L = 0.0;
  double mu = 0.0;
  bool convex = false;
  // L only holds on a bounded region (reported for stepsize scaling).
  bool L_is_local = false;
  // f_inf, when one is known. Must be a true lower bound on f.
  std::optional<double> lower_bound;
  std::optional<Optimum> optimum;
};

class Problem {
 public:
  explicit Problem(ProblemInfo info) : info_(std::move(info)) {}
  virtual ~Problem() = default;

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;

  /// Writes the gradient into `out` and returns f(x).
  virtual double value_and_gradient(std::span<const double> x, std::span<double> out) const {
    gradient(x, out);
    return value(x);
  }

  std::vector<double> gradient(std::span<const double> x) const {
    std::vector<double> g(dim());
    gradient(x, g);
    return g;
  }

  const ProblemInfo& info() const { return info_; }
  const std::string& name() const { return info_.name; }
  std::size_t dim() const { return info_.dim; }
  double smoothness() const { return info_.L; }
  double strong_convexity() const { return info_.mu; }
  bool convex() const { return info_.convex; }

 protected:
  void check_dim(std::size_t n) const;

  ProblemInfo info_;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// f(x) = 1/2 x^T Q x - b^T x with Q symmetric positive semidefinite.
/// L and mu are the extreme eigenvalues of Q; the optimum is attached when Q
/// is nonsingular. Throws std::invalid_argument for an asymmetric or
/// indefinite Q.
ProblemPtr make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b);

/// Two-dimensional Rosenbrock function (1 - x)^2 + 100 (y - x^2)^2.
/// Not globally smooth; L is the largest Hessian spectral norm over
/// [-2, 2]^2 and is flagged as local.
ProblemPtr make_rosenbrock();

/// Largest Hessian spectral norm of Rosenbrock over a (points x points) grid
/// on [-2, 2]^2.
double rosenbrock_box_smoothness(std::size_t points = 401);

/// (1/M) sum log(1 + exp(-y_i [Ax]_i)) + (l2 / 2) |x|^2.
/// L = lambda_max(A^T A) / (4M) + l2 (lambda_max inflated 1%), mu = l2.
ProblemPtr make_logreg_l2(const Dataset& data, double l2);

/// Logistic loss + lambda sum_j x_j^2 / (1 + x_j^2).
/// L = lambda_max(A^T A) / (4M) + 2 lambda (lambda_max inflated 1%), mu = 0.
ProblemPtr make_logreg_nonconvex(const Dataset& data, double lambda);

/// Smoothness of the unregularized logistic loss: 1.01 lambda_max(A^T A) / (4M).
/// The regularization strengths of the logistic benchmarks are set relative
/// to this value.
double logistic_base_smoothness(const Dataset& data);

struct SpectralEstimate {
  double value = 0.0;  // estimate of lambda_max(A^T A), not inflated
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration on A^T A using only products with A and A^T. Stops when the
/// Rayleigh quotient changes by less than rel_tol relative.
SpectralEstimate spectral_norm(const FeatureMatrix& A, double rel_tol = 1e-6,
                               std::size_t max_iterations = 10000);

/// Multiplier applied to spectral_norm before it enters L.
inline constexpr double kSpectralInflation = 1.01;

/// Central differences (f(x + h e_j) - f(x - h e_j)) / (2h).
std::vector<double> finite_diff_gradient(const Problem& problem,
                                         std::span<const double> x, double h);

}  // namespace agghb
