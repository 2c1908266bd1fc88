#include "agghb/problems.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "agghb/simd.hpp"

namespace agghb {

void Problem::check_dim(std::size_t n) const {
  if (n != info_.dim) {
    throw std::invalid_argument(info_.name + ": expected dimension " +
                                std::to_string(info_.dim) + ", got " + std::to_string(n));
  }
}

namespace {

// ---------------------------------------------------------------- quadratic

class Quadratic final : public Problem {
 public:
  Quadratic(ProblemInfo info, Eigen::MatrixXd Q, Eigen::VectorXd b)
      : Problem(std::move(info)), Q_(std::move(Q)), b_(std::move(b)) {}

  double value(std::span<const double> x) const override {
    check_dim(x.size());
    Eigen::Map<const Eigen::VectorXd> v(x.data(), x.size());
    return 0.5 * v.dot(Q_ * v) - b_.dot(v);
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    check_dim(x.size());
    check_dim(out.size());
    Eigen::Map<const Eigen::VectorXd> v(x.data(), x.size());
    Eigen::Map<Eigen::VectorXd> g(out.data(), out.size());
    g.noalias() = Q_ * v - b_;
  }

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd b_;
};

// --------------------------------------------------------------- rosenbrock

class Rosenbrock final : public Problem {
 public:
  using Problem::Problem;

  double value(std::span<const double> x) const override {
    check_dim(x.size());
    const double a = 1.0 - x[0];
    const double c = x[1] - x[0] * x[0];
    return a * a + 100.0 * c * c;
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    check_dim(x.size());
    check_dim(out.size());
    const double c = x[1] - x[0] * x[0];
    out[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * c;
    out[1] = 200.0 * c;
  }
};

// ----------------------------------------------------------------- logistic

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(-t)) without overflow.
double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

enum class Regularizer { l2, nonconvex };

class Logistic final : public Problem {
 public:
  Logistic(ProblemInfo info, Dataset data, Regularizer reg, double strength)
      : Problem(std::move(info)), data_(std::move(data)), reg_(reg), strength_(strength) {}

  double value(std::span<const double> x) const override {
    check_dim(x.size());
    const std::size_t M = data_.samples();
    double loss = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      loss += softplus(-data_.labels[i] * data_.features.row_dot(i, x));
    }
    return loss / static_cast<double>(M) + regularizer_value(x);
  }

  void gradient(std::span<const double> x, std::span<double> out) const override {
    accumulate(x, out, false);
  }

  double value_and_gradient(std::span<const double> x, std::span<double> out) const override {
    return accumulate(x, out, true);
  }

 private:
  // One pass over the rows: each row's margin, loss and gradient contribution
  // are computed while the row is hot.
  double accumulate(std::span<const double> x, std::span<double> out, bool with_value) const {
    check_dim(x.size());
    check_dim(out.size());
    const std::size_t M = data_.samples();
    const double inv_M = 1.0 / static_cast<double>(M);
    std::fill(out.begin(), out.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double y = data_.labels[i];
      const double t = -y * data_.features.row_dot(i, x);
      if (with_value) loss += softplus(t);
      const double coeff = -y * sigmoid(t) * inv_M;
      if (coeff != 0.0) data_.features.row_axpy(i, coeff, out);
    }
    add_regularizer_gradient(x, out);
    return with_value ? loss * inv_M + regularizer_value(x) : 0.0;
  }

  double regularizer_value(std::span<const double> x) const {
    if (strength_ == 0.0) return 0.0;
    if (reg_ == Regularizer::l2) return 0.5 * strength_ * simd::squared_norm(x);
    double s = 0.0;
    for (double v : x) s += v * v / (1.0 + v * v);
    return strength_ * s;
  }

  void add_regularizer_gradient(std::span<const double> x, std::span<double> out) const {
    if (strength_ == 0.0) return;
    if (reg_ == Regularizer::l2) {
      simd::axpy(strength_, x, out);
      return;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = 1.0 + x[j] * x[j];
      out[j] += 2.0 * strength_ * x[j] / (d * d);
    }
  }

  Dataset data_;
  Regularizer reg_;
  double strength_;
};

void check_dataset(const Dataset& data) {
  if (data.samples() == 0) throw std::invalid_argument("dataset has no samples");
  if (data.labels.size() != data.samples()) {
    throw std::invalid_argument("dataset: " + std::to_string(data.labels.size()) +
                                " labels for " + std::to_string(data.samples()) + " rows");
  }
  for (double y : data.labels) {
    if (y != 1.0 && y != -1.0) throw std::invalid_argument("dataset labels must be -1 or +1");
  }
}

Dataset preferred(const Dataset& data) {
  return Dataset{data.features.with_preferred_layout(), data.labels};
}

}  // namespace

ProblemPtr make_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b) {
  const auto n = Q.rows();
  if (n == 0 || Q.cols() != n || b.size() != n) {
    throw std::invalid_argument("quadratic: Q must be square and match b");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("quadratic: Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (lmin < -1e-12 * scale) throw std::invalid_argument("quadratic: Q is not PSD");

  ProblemInfo info;
  info.name = "quadratic";
  info.dim = static_cast<std::size_t>(n);
  info.L = std::max(lmax, 0.0);
  info.mu = std::max(lmin, 0.0);
  info.convex = true;
  if (lmin > 1e-12 * scale) {
    Eigen::VectorXd xs = Q.ldlt().solve(b);
    Optimum opt{std::vector<double>(xs.data(), xs.data() + n), -0.5 * b.dot(xs)};
    info.lower_bound = opt.f;
    info.optimum = std::move(opt);
  } else if (b.isZero(0.0)) {
    info.lower_bound = 0.0;
    info.optimum = Optimum{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0};
  }
  return std::make_shared<Quadratic>(std::move(info), Q, b);
}

double rosenbrock_box_smoothness(std::size_t points) {
  if (points < 2) throw std::invalid_argument("rosenbrock_box_smoothness: need >= 2 points");
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    for (std::size_t j = 0; j < points; ++j) {
      const double y = -2.0 + 4.0 * static_cast<double>(j) / static_cast<double>(points - 1);
      // Hessian [[a, c], [c, d]].
      const double a = 1200.0 * x * x - 400.0 * y + 2.0;
      const double c = -400.0 * x;
      const double d = 200.0;
      const double mid = 0.5 * (a + d);
      const double rad = std::hypot(0.5 * (a - d), c);
      best = std::max({best, std::abs(mid + rad), std::abs(mid - rad)});
    }
  }
  return best;
}

ProblemPtr make_rosenbrock() {
  ProblemInfo info;
  info.name = "rosenbrock";
  info.dim = 2;
  info.L = rosenbrock_box_smoothness();
  info.L_is_local = true;
  info.lower_bound = 0.0;
  info.optimum = Optimum{{1.0, 1.0}, 0.0};
  return std::make_shared<Rosenbrock>(std::move(info));
}

double logistic_base_smoothness(const Dataset& data) {
  check_dataset(data);
  const SpectralEstimate est = spectral_norm(data.features);
  return kSpectralInflation * est.value / (4.0 * static_cast<double>(data.samples()));
}

ProblemPtr make_logreg_l2(const Dataset& data, double l2) {
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("logreg-l2: l2 must be >= 0");
  ProblemInfo info;
  info.name = "logreg-l2";
  info.dim = data.dim();
  info.L = logistic_base_smoothness(data) + l2;
  info.mu = l2;
  info.convex = true;
  info.lower_bound = 0.0;
  return std::make_shared<Logistic>(std::move(info), preferred(data), Regularizer::l2, l2);
}

ProblemPtr make_logreg_nonconvex(const Dataset& data, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("logreg-ncvx: lambda must be >= 0");
  }
  ProblemInfo info;
  info.name = "logreg-ncvx";
  info.dim = data.dim();
  info.L = logistic_base_smoothness(data) + 2.0 * lambda;
  info.mu = 0.0;
  info.convex = lambda == 0.0;
  info.lower_bound = 0.0;
  return std::make_shared<Logistic>(std::move(info), preferred(data), Regularizer::nonconvex,
                                    lambda);
}

SpectralEstimate spectral_norm(const FeatureMatrix& A, double rel_tol,
                               std::size_t max_iterations) {
  SpectralEstimate out;
  const std::size_t n = A.cols();
  if (n == 0 || A.rows() == 0) {
    out.converged = true;
    return out;
  }
  // Fixed pseudo-random start: a structured start vector (all ones, a basis
  // vector) can be orthogonal to the top eigenvector.
  std::mt19937_64 gen(0x5eedULL);
  std::vector<double> v(n);
  for (double& e : v) e = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
  std::vector<double> Av(A.rows());
  double previous = 0.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const double norm = std::sqrt(simd::squared_norm(v));
    if (norm == 0.0) {
      out.value = 0.0;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    for (double& e : v) e /= norm;
    A.multiply(v, Av);
    const double rayleigh = simd::squared_norm(Av);  // v^T A^T A v
    A.multiply_transpose(Av, v);
    out.value = rayleigh;
    out.iterations = it;
    if (it > 1 && std::abs(rayleigh - previous) <= rel_tol * rayleigh) {
      out.converged = true;
      return out;
    }
    previous = rayleigh;
  }
  return out;
}

std::vector<double> finite_diff_gradient(const Problem& problem, std::span<const double> x,
                                         double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = problem.value(probe);
    probe[j] = x[j] - h;
    const double down = problem.value(probe);
    probe[j] = x[j];
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

}  // namespace agghb
