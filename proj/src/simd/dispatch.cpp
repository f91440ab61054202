#include <cstdlib>
#include <stdexcept>
#include <string>

#include "feemarket/simd/kernels.hpp"

namespace feemarket::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::optional<KernelTable> kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return KernelTable{Isa::Scalar, &scalar::sum, &scalar::ratio_sum, &scalar::count_at_least};
    case Isa::Avx2:
#if defined(FEEMARKET_WITH_AVX2)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt")) {
        return KernelTable{Isa::Avx2, &avx2::sum, &avx2::ratio_sum, &avx2::count_at_least};
      }
#endif
      return std::nullopt;
    case Isa::Neon:
#if defined(FEEMARKET_WITH_NEON)
      return KernelTable{Isa::Neon, &neon::sum, &neon::ratio_sum, &neon::count_at_least};
#else
      return std::nullopt;
#endif
  }
  return std::nullopt;
}

namespace {

KernelTable select() {
  if (const char* forced = std::getenv("FEEMARKET_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (name == to_string(isa)) {
        if (auto table = kernels_for(isa)) return *table;
      }
    }
    return *kernels_for(Isa::Scalar);
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (auto table = kernels_for(isa)) return *table;
  }
  return *kernels_for(Isa::Scalar);
}

}  // namespace

const KernelTable& active() {
  static const KernelTable table = select();
  return table;
}

double sum(std::span<const double> values) {
  return active().sum(values.data(), values.size());
}

double ratio_sum(std::span<const double> num, std::span<const double> den) {
  if (num.size() != den.size()) throw std::invalid_argument("ratio_sum: length mismatch");
  return active().ratio_sum(num.data(), den.data(), num.size());
}

std::size_t count_at_least(std::span<const double> values, double threshold) {
  return active().count_at_least(values.data(), values.size(), threshold);
}

}  // namespace feemarket::simd
