#include "agghb/simd.hpp"

namespace agghb::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

void momentum_step(double beta, double scale, const double* g, double* v,
                   double* x, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = beta * v[j] + g[j];
    x[j] -= scale * v[j];
  }
}

double sparse_dot(const double* values, const std::uint32_t* index,
                  std::size_t nnz, const double* x) {
  double s = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) s += values[k] * x[index[k]];
  return s;
}

void sparse_axpy(double alpha, const double* values, const std::uint32_t* index,
                 std::size_t nnz, double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[index[k]] += alpha * values[k];
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, dot, axpy, momentum_step, sparse_dot,
                               sparse_axpy};
}  // namespace detail

}  // namespace agghb::simd
