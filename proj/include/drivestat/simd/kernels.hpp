#pragma once

// Data-parallel inner loops shared by the estimators. Every kernel has a
// scalar reference implementation and, where the build and the CPU allow it,
// an AVX2/FMA variant. The active table is chosen once per process.
//
// Setting DRIVESTAT_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace drivestat::simd {

struct KernelTable {
  std::string_view name;

  /// out[j] = sum_i exp(-0.5 * ((nodes[j] - samples[i]) * inv_h)^2)
  void (*gauss_sum)(std::span<const double> nodes, std::span<const double> samples,
                    double inv_h, std::span<double> out);

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// sum_i log1p(tau * x[i]); every 1 + tau * x[i] must be > 0.
  double (*sum_log1p_scaled)(std::span<const double> x, double tau);

  /// sum_i p_i * log(p_i / q_i) with p, q clamped below at `floor`.
  double (*kl_terms)(std::span<const double> p, std::span<const double> q, double floor);

  /// out[i] = exp(x[i]) elementwise.
  void (*exp)(std::span<const double> x, std::span<double> out);
};

const KernelTable& scalar_kernels();

/// Returns nullptr when the AVX2 variant was not compiled in or the CPU lacks
/// AVX2+FMA.
const KernelTable* avx2_kernels();

/// The table selected for this process.
const KernelTable& active();

}  // namespace drivestat::simd
