#pragma once

// Maximum-likelihood fits of the three magnitude models and their AIC/BIC
// ranking.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drivestat/distributions.hpp"

namespace drivestat {

enum class Model { exponential, gpd, normal };

std::string_view to_string(Model m);
/// Number of free parameters (gpd 2, normal 2, exponential 1).
int parameter_count(Model m);

using Theta = std::variant<GpdParams, NormalParams, ExpParams>;

struct FitReport {
  Model model = Model::gpd;
  Theta theta;
  double logL = 0.0;
  int r = 0;
  std::size_t n = 0;
  double aic = 0.0;
  double bic = 0.0;
  bool ok = true;          ///< false when the fit failed; only `model` and `diagnostic` are meaningful
  std::string diagnostic;  ///< empty unless the fit failed or used a fallback
};

double aic(int r, double logL);
double bic(std::size_t n, int r, double logL);

inline constexpr std::size_t kMinGpdSamples = 30;

/// Profile-likelihood MLE over tau = k / sigma. Throws DegenerateError for
/// constant data, too few samples, or an optimum on the feasibility boundary.
FitReport fit_gpd_mle(std::span<const double> samples);
FitReport fit_normal(std::span<const double> samples);
FitReport fit_exponential(std::span<const double> samples);

/// Direct re-evaluation of sum log pdf(x_i; theta).
double log_likelihood(const Theta& theta, std::span<const double> samples);

struct ModelRanking {
  std::vector<FitReport> fits;  ///< gpd, normal, exponential in that order
  std::vector<Model> by_aic;    ///< ascending AIC, failed fits excluded
  std::vector<Model> by_bic;
  std::vector<std::string> flags;

  [[nodiscard]] const FitReport& fit(Model m) const;
};

/// Runs all three fits and orders the successful ones. Ties are broken by
/// model id.
ModelRanking rank_models(std::span<const double> samples);

}  // namespace drivestat
