#include "drivestat/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace drivestat::simd {
namespace {

void gauss_sum_scalar(std::span<const double> nodes, std::span<const double> samples, double inv_h,
                      std::span<double> out) {
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double node = nodes[j];
    double acc = 0.0;
    for (const double s : samples) {
      const double z = (node - s) * inv_h;
      acc += std::exp(-0.5 * z * z);
    }
    out[j] = acc;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_log1p_scaled_scalar(std::span<const double> x, double tau) {
  double acc = 0.0;
  for (const double v : x) acc += std::log1p(tau * v);
  return acc;
}

double kl_terms_scalar(std::span<const double> p, std::span<const double> q, double floor) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::max(p[i], floor);
    const double qc = std::max(q[i], floor);
    acc += pc * std::log(pc / qc);
  }
  return acc;
}

void exp_scalar(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", gauss_sum_scalar, dot_scalar, sum_log1p_scaled_scalar,
                                 kl_terms_scalar, exp_scalar};
  return table;
}

}  // namespace drivestat::simd
