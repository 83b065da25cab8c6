#include "drivestat/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "drivestat/error.hpp"

namespace drivestat {
namespace {

bool exponential_limit(double k) { return std::fabs(k) < kGpdShapeTolerance; }

void require_support(double x, const GpdParams& p) {
  if (!p.in_support(x))
    throw DomainError("gpd: x=" + std::to_string(x) + " outside support [0, " +
                      std::to_string(p.upper_bound()) + "]");
}

}  // namespace

double GpdParams::upper_bound() const {
  if (k < 0.0 && !exponential_limit(k)) return -sigma / k;
  return std::numeric_limits<double>::infinity();
}

bool GpdParams::in_support(double x) const { return x >= 0.0 && x <= upper_bound(); }

void validate(const GpdParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.k))
    throw ParameterError("gpd: sigma must be finite and > 0, k finite");
}

void validate(const NormalParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu))
    throw ParameterError("normal: sigma must be finite and > 0");
}

void validate(const ExpParams& p) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw ParameterError("exponential: mu must be > 0");
}

double gpd_logpdf(double x, const GpdParams& p) {
  validate(p);
  require_support(x, p);
  if (exponential_limit(p.k)) return -std::log(p.sigma) - x / p.sigma;
  // At the upper endpoint of a k<0 model log1p(-1) = -inf, giving density 0 (k > -1).
  return -std::log(p.sigma) - (1.0 + 1.0 / p.k) * std::log1p(p.k * x / p.sigma);
}

double gpd_pdf(double x, const GpdParams& p) { return std::exp(gpd_logpdf(x, p)); }

double gpd_cdf(double x, const GpdParams& p) {
  validate(p);
  require_support(x, p);
  if (exponential_limit(p.k)) return -std::expm1(-x / p.sigma);
  return -std::expm1(-std::log1p(p.k * x / p.sigma) / p.k);
}

double gpd_quantile(double prob, const GpdParams& p) {
  validate(p);
  if (!(prob >= 0.0 && prob < 1.0))
    throw DomainError("gpd_quantile: prob must lie in [0, 1), got " + std::to_string(prob));
  const double tail = -std::log1p(-prob);  // -ln(1 - prob)
  if (exponential_limit(p.k)) return p.sigma * tail;
  return p.sigma / p.k * std::expm1(p.k * tail);
}

double gpd_draw(Rng& rng, const GpdParams& p) { return gpd_quantile(rng.uniform(), p); }

std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, std::uint64_t seed) {
  validate(p);
  if (n == 0) throw ParameterError("gpd_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = gpd_draw(rng, p);
  return out;
}

double normal_logpdf(double x, const NormalParams& p) {
  validate(p);
  const double z = (x - p.mu) / p.sigma;
  return -0.5 * z * z - std::log(p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_pdf(double x, const NormalParams& p) { return std::exp(normal_logpdf(x, p)); }

double exp_logpdf(double x, const ExpParams& p) {
  validate(p);
  if (!(x >= 0.0)) throw DomainError("exp_pdf: x must be >= 0");
  return -std::log(p.mu) - x / p.mu;
}

double exp_pdf(double x, const ExpParams& p) { return std::exp(exp_logpdf(x, p)); }

}  // namespace drivestat
