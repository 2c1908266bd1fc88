#include <cstdlib>
#include <stdexcept>
#include <string>

#include "agghb/simd.hpp"

namespace agghb::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(AGGHB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("instruction set not available: " +
                                std::string(isa_name(isa)));
  }
#if defined(AGGHB_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("AGGHB_ISA")) {
    if (std::string_view(forced) == "scalar") return detail::scalar_table;
  }
  if (isa_supported(Isa::avx2)) return kernels(Isa::avx2);
  return detail::scalar_table;
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& active = select();
  return active;
}

}  // namespace agghb::simd
