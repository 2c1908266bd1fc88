// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.

#include <immintrin.h>

#include "agghb/simd.hpp"

namespace agghb::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4),
                           acc1);
  }
  if (j + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    j += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vy = _mm256_loadu_pd(y + j);
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), vy));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

void momentum_step(double beta, double scale, const double* g, double* v,
                   double* x, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vv = _mm256_fmadd_pd(vb, _mm256_loadu_pd(v + j), _mm256_loadu_pd(g + j));
    _mm256_storeu_pd(v + j, vv);
    _mm256_storeu_pd(x + j, _mm256_fnmadd_pd(vs, vv, _mm256_loadu_pd(x + j)));
  }
  for (; j < n; ++j) {
    v[j] = beta * v[j] + g[j];
    x[j] -= scale * v[j];
  }
}

double sparse_dot(const double* values, const std::uint32_t* index,
                  std::size_t nnz, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= nnz; k += 4) {
    __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(index + k));
    __m256d gathered = _mm256_i32gather_pd(x, idx, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(values + k), gathered, acc);
  }
  double s = hsum(acc);
  for (; k < nnz; ++k) s += values[k] * x[index[k]];
  return s;
}

// No scatter in AVX2; the multiply is vectorized and the stores are scalar.
void sparse_axpy(double alpha, const double* values, const std::uint32_t* index,
                 std::size_t nnz, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  alignas(32) double scaled[4];
  std::size_t k = 0;
  for (; k + 4 <= nnz; k += 4) {
    _mm256_store_pd(scaled, _mm256_mul_pd(va, _mm256_loadu_pd(values + k)));
    y[index[k]] += scaled[0];
    y[index[k + 1]] += scaled[1];
    y[index[k + 2]] += scaled[2];
    y[index[k + 3]] += scaled[3];
  }
  for (; k < nnz; ++k) y[index[k]] += alpha * values[k];
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2, dot, axpy, momentum_step, sparse_dot,
                             sparse_axpy};
}  // namespace detail

}  // namespace agghb::simd
