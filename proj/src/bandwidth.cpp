#include <fftw3.h>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "drivestat/error.hpp"
#include "drivestat/kde.hpp"
#include "drivestat/log.hpp"

namespace drivestat {
namespace {

constexpr std::size_t kBins = std::size_t{1} << 14;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

void require_selectable(std::span<const double> x) {
  if (x.size() < kMinBandwidthSamples)
    throw DegenerateError("bandwidth selection needs at least " + std::to_string(kMinBandwidthSamples) +
                          " samples, got " + std::to_string(x.size()));
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (!(*mx > *mn)) throw DegenerateError("bandwidth selection: all samples are equal");
  for (const double v : x)
    if (!std::isfinite(v)) throw DegenerateError("bandwidth selection: non-finite sample");
}

// DCT-II of the normalized bin counts, as returned by FFTW's REDFT10
// (Y_k = 2 sum_j x_j cos(pi k (j + 1/2) / n)).
std::vector<double> dct2(std::vector<double> in) {
  static std::mutex plan_mutex;  // FFTW planning is not thread-safe
  std::vector<double> out(in.size());
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex);
    plan = fftw_plan_r2r_1d(static_cast<int>(in.size()), in.data(), out.data(), FFTW_REDFT10,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

// t - zeta * gamma^[l](t) for l = 7 stages.
class FixedPoint {
 public:
  FixedPoint(double n, std::vector<double> coeff_sq) : n_(n), a2_(std::move(coeff_sq)) {
    i_.resize(a2_.size());
    for (std::size_t k = 0; k < i_.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      i_[k] = kk * kk;
    }
  }

  double operator()(double t) const {
    constexpr int l = 7;
    const double pi = std::numbers::pi;
    double f = functional(l, t);
    for (int s = l - 1; s >= 2; --s) {
      double odd_prod = 1.0;
      for (int j = 1; j <= 2 * s - 1; j += 2) odd_prod *= j;
      const double k0 = odd_prod / std::sqrt(2.0 * pi);
      const double c = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
      const double time = std::pow(2.0 * c * k0 / n_ / f, 2.0 / (3.0 + 2.0 * s));
      f = functional(s, time);
    }
    return t - std::pow(2.0 * n_ * std::sqrt(pi) * f, -0.4);
  }

 private:
  double functional(int s, double t) const {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (std::size_t k = 0; k < i_.size(); ++k) {
      const double term = std::exp(-i_[k] * pi2 * t);
      if (term == 0.0) break;  // terms decrease monotonically in k
      sum += std::pow(i_[k], s) * a2_[k] * term;
    }
    return 2.0 * std::pow(std::numbers::pi, 2 * s) * sum;
  }

  double n_;
  std::vector<double> a2_;
  std::vector<double> i_;
};

}  // namespace

double normal_reference_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DegenerateError("normal reference rule needs >= 2 samples");
  const double n = static_cast<double>(samples.size());
  return std::pow(4.0 / (3.0 * n), 0.2) * moments(samples).sd;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DegenerateError("Silverman rule needs >= 2 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double sd = moments(samples).sd;
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

BandwidthSelection select_bandwidth_1d_detailed(std::span<const double> samples) {
  require_selectable(samples);
  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double span0 = *mx_it - *mn_it;
  const double lo = *mn_it - span0 / 10.0;
  const double hi = *mx_it + span0 / 10.0;
  const double range = hi - lo;
  const double dx = range / static_cast<double>(kBins - 1);

  // Histogram on mesh points lo + j*dx, bins [mesh_j, mesh_j+1).
  std::vector<std::uint64_t> counts(kBins, 0);
  for (const double v : samples) {
    auto j = static_cast<std::size_t>((v - lo) / dx);
    counts[std::min(j, kBins - 1)] += 1;
  }
  const double n = static_cast<double>(samples.size());
  std::vector<double> density(kBins);
  for (std::size_t j = 0; j < kBins; ++j) density[j] = static_cast<double>(counts[j]) / n;

  const std::vector<double> a = dct2(std::move(density));
  std::vector<double> a2(kBins - 1);
  for (std::size_t k = 1; k < kBins; ++k) a2[k - 1] = (a[k] / 2.0) * (a[k] / 2.0);

  const FixedPoint fp(n, std::move(a2));
  const double n_eff = std::clamp(n, 50.0, 1050.0);
  double tol = 1e-12 + 0.01 * (n_eff - 50.0) / 1000.0;
  while (true) {
    const double f_lo = fp(0.0);
    const double f_hi = fp(tol);
    if (std::isfinite(f_lo) && std::isfinite(f_hi) && f_lo * f_hi <= 0.0) {
      boost::uintmax_t iters = 200;
      const auto [a_t, b_t] = boost::math::tools::toms748_solve(
          fp, 0.0, tol, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iters);
      const double t_star = 0.5 * (a_t + b_t);
      if (t_star > 0.0) return {std::sqrt(t_star) * range, false};
      break;
    }
    if (tol >= 0.1) break;
    tol = std::min(tol * 2.0, 0.1);
  }
  warn("plug-in bandwidth fixed point not bracketed; using normal-reference rule");
  return {normal_reference_bandwidth(samples), true};
}

double select_bandwidth_1d(std::span<const double> samples) {
  return select_bandwidth_1d_detailed(samples).bandwidth;
}

BandwidthMatrix select_bandwidth(const PointSet& samples) {
  std::vector<double> h(samples.dim);
  for (std::size_t axis = 0; axis < samples.dim; ++axis) {
    const std::vector<double> col = samples.column(axis);
    h[axis] = select_bandwidth_1d(col);
  }
  if (samples.dim >= 2) {
    const double d = static_cast<double>(samples.dim);
    const double n = static_cast<double>(samples.size());
    const double multi = std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) * std::pow(n, -1.0 / (d + 4.0));
    const double uni = std::pow(4.0 / 3.0, 0.2) * std::pow(n, -0.2);
    for (double& v : h) v *= multi / uni;
  }
  return BandwidthMatrix::from_bandwidths(h);
}

}  // namespace drivestat
