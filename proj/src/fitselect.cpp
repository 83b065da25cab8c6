#include "drivestat/fitselect.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "drivestat/error.hpp"
#include "drivestat/simd/kernels.hpp"

namespace drivestat {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_finite(std::span<const double> x, std::string_view who) {
  for (const double v : x)
    if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite sample");
}

void require_nonnegative(std::span<const double> x, std::string_view who) {
  for (const double v : x)
    if (!(v >= 0.0)) throw DomainError(std::string(who) + ": samples must be >= 0");
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

FitReport finish(Model m, Theta theta, double logL, std::size_t n) {
  FitReport r;
  r.model = m;
  r.theta = theta;
  r.logL = logL;
  r.r = parameter_count(m);
  r.n = n;
  r.aic = aic(r.r, logL);
  r.bic = bic(n, r.r, logL);
  if (!std::isfinite(logL)) throw AnalyticError(std::string(to_string(m)) + " fit: non-finite likelihood");
  return r;
}

// Profile log-likelihood of the GPD as a function of tau = k / sigma.
class GpdProfile {
 public:
  explicit GpdProfile(std::span<const double> x) : x_(x), n_(static_cast<double>(x.size())), mean_(mean_of(x)) {}

  [[nodiscard]] double shape(double tau) const {
    return simd::active().sum_log1p_scaled(x_, tau) / n_;
  }

  [[nodiscard]] double operator()(double tau) const {
    if (tau == 0.0) return -n_ * std::log(mean_) - n_;
    const double k = shape(tau);
    const double sigma = k / tau;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) return kNegInf;
    return -n_ * std::log(sigma) - n_ * (1.0 + k);
  }

  [[nodiscard]] double mean() const { return mean_; }

 private:
  std::span<const double> x_;
  double n_;
  double mean_;
};

struct Candidate {
  double tau = 0.0;
  double value = kNegInf;
};

// Maximizes the profile over tau = sign * exp(s) for s in [s_lo, s_hi].
Candidate search_log_interval(const GpdProfile& profile, double sign, double s_lo, double s_hi) {
  auto neg = [&](double s) {
    const double v = profile(sign * std::exp(s));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };
  boost::uintmax_t iters = 200;
  const auto [s, v] = boost::math::tools::brent_find_minima(neg, s_lo, s_hi, 40, iters);
  return {sign * std::exp(s), -v};
}

}  // namespace

std::string_view to_string(Model m) {
  switch (m) {
    case Model::exponential:
      return "exponential";
    case Model::gpd:
      return "gpd";
    case Model::normal:
      return "normal";
  }
  return "unknown";
}

int parameter_count(Model m) { return m == Model::exponential ? 1 : 2; }

double aic(int r, double logL) { return 2.0 * r - 2.0 * logL; }

double bic(std::size_t n, int r, double logL) { return std::log(static_cast<double>(n)) * r - 2.0 * logL; }

double log_likelihood(const Theta& theta, std::span<const double> samples) {
  return std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        double s = 0.0;
        for (const double x : samples) {
          if constexpr (std::is_same_v<T, GpdParams>)
            s += gpd_logpdf(x, p);
          else if constexpr (std::is_same_v<T, NormalParams>)
            s += normal_logpdf(x, p);
          else
            s += exp_logpdf(x, p);
        }
        return s;
      },
      theta);
}

FitReport fit_gpd_mle(std::span<const double> samples) {
  if (samples.size() < kMinGpdSamples)
    throw DegenerateError("gpd fit needs at least " + std::to_string(kMinGpdSamples) + " samples, got " +
                          std::to_string(samples.size()));
  require_finite(samples, "gpd fit");
  require_nonnegative(samples, "gpd fit");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!(*mx > *mn)) throw DegenerateError("gpd fit: all samples are equal");

  const GpdProfile profile(samples);
  const double xmax = *mx;
  const double tau_lo = -(1.0 - 1e-6) / xmax;
  const double tau_hi = 1e3 / profile.mean();

  // Three log-spaced sub-intervals on each side of tau = 0; tau = 0 itself is
  // the exponential limit.
  std::vector<Candidate> candidates{{0.0, profile(0.0)}};
  const double decades[] = {1e-9, 1e-6, 1e-3, 1.0};
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const double edge = side == 0 ? tau_hi : -tau_lo;
    for (int i = 0; i < 3; ++i)
      candidates.push_back(
          search_log_interval(profile, sign, std::log(edge * decades[i]), std::log(edge * decades[i + 1])));
  }
  const Candidate best = *std::max_element(candidates.begin(), candidates.end(),
                                           [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

  const std::size_t n = samples.size();
  if (best.tau == 0.0 || !std::isfinite(best.value)) {
    GpdParams p{0.0, profile.mean()};
    FitReport r = finish(Model::gpd, p, log_likelihood(p, samples), n);
    if (!std::isfinite(best.value)) r.diagnostic = "profile search failed; exponential-limit fit";
    return r;
  }
  const double rel_to_lo = std::fabs(best.tau - tau_lo) / std::fabs(tau_lo);
  const double rel_to_hi = std::fabs(best.tau - tau_hi) / tau_hi;
  const double k = profile.shape(best.tau);
  if (rel_to_lo < 1e-3 || rel_to_hi < 1e-3 || k <= -1.0)
    throw DegenerateError("gpd fit: likelihood maximum on the feasibility boundary (k=" + std::to_string(k) +
                          "); data do not support a GPD fit");
  GpdParams p{k, k / best.tau};
  if (std::fabs(p.k) < kGpdShapeTolerance) p = {0.0, profile.mean()};
  return finish(Model::gpd, p, log_likelihood(p, samples), n);
}

FitReport fit_normal(std::span<const double> samples) {
  if (samples.size() < 2) throw DegenerateError("normal fit needs at least 2 samples");
  require_finite(samples, "normal fit");
  const double mu = mean_of(samples);
  double ss = 0.0;
  for (const double v : samples) ss += (v - mu) * (v - mu);
  const double var = ss / static_cast<double>(samples.size());
  if (!(var > 0.0)) throw DegenerateError("normal fit: zero variance");
  const NormalParams p{mu, std::sqrt(var)};
  const double n = static_cast<double>(samples.size());
  const double logL = -0.5 * n * std::log(2.0 * std::numbers::pi * var) - 0.5 * n;
  return finish(Model::normal, p, logL, samples.size());
}

FitReport fit_exponential(std::span<const double> samples) {
  if (samples.empty()) throw DegenerateError("exponential fit needs at least 1 sample");
  require_finite(samples, "exponential fit");
  require_nonnegative(samples, "exponential fit");
  const double mu = mean_of(samples);
  if (!(mu > 0.0)) throw DegenerateError("exponential fit: zero mean");
  const double n = static_cast<double>(samples.size());
  return finish(Model::exponential, ExpParams{mu}, -n * std::log(mu) - n, samples.size());
}

const FitReport& ModelRanking::fit(Model m) const {
  for (const auto& f : fits)
    if (f.model == m) return f;
  throw Error("ranking holds no fit for " + std::string(to_string(m)));
}

ModelRanking rank_models(std::span<const double> samples) {
  if (samples.size() < kMinGpdSamples)
    throw DegenerateError("rank_models needs at least " + std::to_string(kMinGpdSamples) + " samples");
  ModelRanking ranking;
  using FitFn = FitReport (*)(std::span<const double>);
  const std::pair<Model, FitFn> battery[] = {
      {Model::gpd, fit_gpd_mle}, {Model::normal, fit_normal}, {Model::exponential, fit_exponential}};
  for (const auto& [model, fn] : battery) {
    try {
      ranking.fits.push_back(fn(samples));
    } catch (const Error& e) {
      FitReport failed;
      failed.model = model;
      failed.ok = false;
      failed.n = samples.size();
      failed.r = parameter_count(model);
      failed.diagnostic = e.what();
      ranking.fits.push_back(failed);
      ranking.flags.push_back(std::string(to_string(model)) + ": " + e.what());
    }
  }
  std::vector<const FitReport*> ok;
  for (const auto& f : ranking.fits)
    if (f.ok) ok.push_back(&f);
  auto order = [&](auto key) {
    std::vector<const FitReport*> sorted = ok;
    std::sort(sorted.begin(), sorted.end(), [&](const FitReport* a, const FitReport* b) {
      if (key(*a) != key(*b)) return key(*a) < key(*b);
      return to_string(a->model) < to_string(b->model);
    });
    std::vector<Model> out;
    for (const auto* f : sorted) out.push_back(f->model);
    return out;
  };
  ranking.by_aic = order([](const FitReport& f) { return f.aic; });
  ranking.by_bic = order([](const FitReport& f) { return f.bic; });
  return ranking;
}

}  // namespace drivestat
