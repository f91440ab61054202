#pragma once

// Reduction kernels with a scalar reference and vector variants selected at
// runtime.
//
// Every variant uses the same four-lane accumulation order: element i feeds
// lane i % 4, each lane keeps a Neumaier compensation term, and lanes are
// combined in index order. Results are therefore bit-identical across
// variants, which the equivalence tests check.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace feemarket::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  double (*sum)(const double* values, std::size_t n);
  double (*ratio_sum)(const double* num, const double* den, std::size_t n);
  std::size_t (*count_at_least)(const double* values, std::size_t n, double threshold);
};

namespace scalar {
double sum(const double* values, std::size_t n);
double ratio_sum(const double* num, const double* den, std::size_t n);
std::size_t count_at_least(const double* values, std::size_t n, double threshold);
}  // namespace scalar

#if defined(FEEMARKET_WITH_AVX2)
namespace avx2 {
double sum(const double* values, std::size_t n);
double ratio_sum(const double* num, const double* den, std::size_t n);
std::size_t count_at_least(const double* values, std::size_t n, double threshold);
}  // namespace avx2
#endif

#if defined(FEEMARKET_WITH_NEON)
namespace neon {
double sum(const double* values, std::size_t n);
double ratio_sum(const double* num, const double* den, std::size_t n);
std::size_t count_at_least(const double* values, std::size_t n, double threshold);
}  // namespace neon
#endif

/// Kernel table for `isa`, or nullopt when it is not compiled in or the CPU
/// lacks it.
std::optional<KernelTable> kernels_for(Isa isa);

/// Best available table. FEEMARKET_SIMD=scalar|avx2|neon overrides the choice
/// (falling back to scalar if the request cannot be honoured).
const KernelTable& active();

/// Compensated sum in the canonical lane order.
double sum(std::span<const double> values);
/// Compensated sum of num[i] / den[i]; spans must have equal length.
double ratio_sum(std::span<const double> num, std::span<const double> den);
/// Number of values >= threshold (NaN never counts).
std::size_t count_at_least(std::span<const double> values, double threshold);

}  // namespace feemarket::simd
