#pragma once

// Univariate models used for the magnitude fits: generalized Pareto (GPD),
// normal and exponential. GPD support starts at zero (no location parameter).

#include <cstdint>
#include <vector>

#include "drivestat/rng.hpp"

namespace drivestat {

/// Shapes with |k| below this are evaluated through the exponential limit.
inline constexpr double kGpdShapeTolerance = 1e-8;

struct GpdParams {
  double k = 0.0;      ///< shape
  double sigma = 1.0;  ///< scale

  /// Upper support endpoint; +inf when k >= 0.
  [[nodiscard]] double upper_bound() const;
  [[nodiscard]] bool in_support(double x) const;
};

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

struct ExpParams {
  double mu = 1.0;  ///< mean
};

void validate(const GpdParams& p);
void validate(const NormalParams& p);
void validate(const ExpParams& p);

double gpd_pdf(double x, const GpdParams& p);
double gpd_logpdf(double x, const GpdParams& p);
double gpd_cdf(double x, const GpdParams& p);
/// Rejects prob outside [0, 1); prob = 1 is unbounded for k >= 0.
double gpd_quantile(double prob, const GpdParams& p);

/// Inverse-CDF sampling; one uniform draw per value.
std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, std::uint64_t seed);
double gpd_draw(Rng& rng, const GpdParams& p);

double normal_pdf(double x, const NormalParams& p);
double normal_logpdf(double x, const NormalParams& p);
double exp_pdf(double x, const ExpParams& p);
double exp_logpdf(double x, const ExpParams& p);

}  // namespace drivestat
