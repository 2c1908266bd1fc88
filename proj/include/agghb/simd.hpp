#pragma once

// Vector kernels used by the optimizer and the objectives.
//
// Every kernel exists as a portable scalar reference and, where the target
// supports it, an AVX2+FMA variant. The variant is chosen once at startup from
// the CPU feature bits; AGGHB_ISA=scalar in the environment forces the
// reference path. The two paths agree to rounding (FMA and lane-wise
// reductions reorder floating-point operations), not bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace agghb::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_j a[j] * b[j]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // v = beta * v + g; x -= scale * v   (one heavy-ball buffer update)
  void (*momentum_step)(double beta, double scale, const double* g, double* v,
                        double* x, std::size_t n);
  // sum_k values[k] * x[index[k]]
  double (*sparse_dot)(const double* values, const std::uint32_t* index,
                       std::size_t nnz, const double* x);
  // y[index[k]] += alpha * values[k]
  void (*sparse_axpy)(double alpha, const double* values,
                      const std::uint32_t* index, std::size_t nnz, double* y);
};

bool isa_supported(Isa isa);

/// Table for a specific instruction set. Throws std::invalid_argument if the
/// running CPU (or the build) does not support it.
const KernelTable& kernels(Isa isa);

/// Table selected for this process.
const KernelTable& kernels();

// Span conveniences over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) {
  return kernels().dot(a.data(), a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

namespace detail {
// Populated by the per-ISA translation units.
extern const KernelTable scalar_table;
#if defined(AGGHB_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace agghb::simd
