#pragma once

// Bivariate acceleration models: the elliptical normal model (BNDM) and the
// quadrant-wise product of GPD magnitudes (BPDM), with analytic contours.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "drivestat/distributions.hpp"
#include "drivestat/levelset.hpp"
#include "drivestat/types.hpp"

namespace drivestat {

inline constexpr std::size_t kDefaultContourPoints = 512;

/// Zero means, zero correlation. The density is
/// exp(-x^2/sx^2 - y^2/sy^2) / (2 pi sx sy), as written in the model; note
/// that this form carries total mass 1/2.
struct BndmParams {
  double sigma_nx = 1.0;
  double sigma_ny = 1.0;
};

void validate(const BndmParams& p);
double bndm_pdf(double x, double y, const BndmParams& p);
double bndm_peak(const BndmParams& p);
/// eta = -ln(2 pi sx sy C); the contour is x^2/sx^2 + y^2/sy^2 = eta.
double bndm_eta(double level, const BndmParams& p);
/// Closed ellipse (a single point at the peak level).
Polyline bndm_contour(double level, const BndmParams& p, std::size_t points = kDefaultContourPoints);

/// Sign quadrants, ordered (ax<0, ay<0), (ax<0, ay>=0), (ax>=0, ay<0), (ax>=0, ay>=0).
enum class Quadrant : int { brake_left = 0, brake_right = 1, forward_left = 2, forward_right = 3 };

struct BpdmParams {
  GpdParams brake;    ///< |ax| for ax < 0
  GpdParams forward;  ///< ax for ax >= 0
  GpdParams left;     ///< |ay| for ay < 0
  GpdParams right;    ///< ay for ay >= 0
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};  ///< indexed by Quadrant

  /// Reference set with both lateral sections merged; the default for synthesis.
  static BpdmParams reference();
  /// Separate fitted parameters for the four sections.
  static BpdmParams fitted_sections();

  [[nodiscard]] const GpdParams& x_params(Quadrant q) const;
  [[nodiscard]] const GpdParams& y_params(Quadrant q) const;
};

void validate(const BpdmParams& p);
Quadrant quadrant_of(double ax, double ay);

/// w_q * f_|x|(|ax|) * f_|y|(|ay|); integrates to one over the plane.
double bpdm_pdf(double ax, double ay, const BpdmParams& p);
/// Largest density value (attained at the origin of some quadrant).
double bpdm_peak(const BpdmParams& p);

/// Which exponent sign to use for omega_y in the closed-form contour.
/// `derived`: (sx sy C)^(-ky/(1+ky)), which lies on the level set.
/// `printed`: (sx sy C)^(+ky/(1+ky)), kept for comparison.
enum class OmegaSign { derived, printed };

struct ContourConstants {
  double lambda_x = 0.0;
  double lambda_y = 0.0;
  double omega_y = 0.0;
  double gamma = 0.0;
};

ContourConstants contour_constants(double level, const GpdParams& qx, const GpdParams& qy,
                                   OmegaSign sign = OmegaSign::derived);

/// Level curve of f_x(x) * f_y(y) = level in one quadrant (magnitudes), as
/// y(x) sampled uniformly over [0, x_max] where y(x_max) = 0. Shapes within
/// the exponential-limit tolerance use the log-linear closed form.
Polyline bpdm_contour_analytic(double level, const GpdParams& qx, const GpdParams& qy,
                               std::size_t points = kDefaultContourPoints, OmegaSign sign = OmegaSign::derived);

/// max |f_x(x) f_y(y) - level| / level over the polyline's points.
double contour_residual(const Polyline& curve, double level, const GpdParams& qx, const GpdParams& qy);

/// Contours of the full model at an absolute density level, in signed
/// coordinates; quadrants whose peak lies below the level are skipped.
std::vector<Polyline> bpdm_contour(double level, const BpdmParams& p, std::size_t points = kDefaultContourPoints);

/// Analytic contours compared with marching squares on a sampled density.
struct ContourCheck {
  std::vector<Polyline> analytic;
  std::vector<Polyline> numeric;
  double max_deviation = 0.0;  ///< worst analytic-vertex distance to the numeric set
  double diagonal = 0.0;       ///< bounding-box diagonal of the analytic contour
  [[nodiscard]] double relative_deviation() const { return diagonal > 0.0 ? max_deviation / diagonal : 0.0; }
};

inline constexpr std::size_t kDefaultCheckNodes = 1024;

/// One quadrant of the product density f_x(x) f_y(y) on [0, 1.05 x_max] x
/// [0, 1.05 y_max].
ContourCheck check_quadrant_contour(double level, const GpdParams& qx, const GpdParams& qy,
                                    OmegaSign sign = OmegaSign::derived, std::size_t nodes = kDefaultCheckNodes);
/// Full signed model; the grid spans the analytic contour plus 5% per side.
ContourCheck check_bpdm_contour(double level, const BpdmParams& p, std::size_t nodes = kDefaultCheckNodes);
ContourCheck check_bndm_contour(double level, const BndmParams& p, std::size_t nodes = kDefaultCheckNodes);

/// 2-D samples (ax, ay): quadrant by weight, magnitudes by inverse-CDF draws.
PointSet bpdm_sample(std::size_t n, const BpdmParams& p, std::uint64_t seed);

struct BpdmDraw {
  double ax;
  double ay;
};
/// One draw with every scale multiplied by common_scale and the lateral scale
/// further multiplied by (1 + coupling * |ax|).
BpdmDraw bpdm_draw(Rng& rng, const BpdmParams& p, double common_scale = 1.0, double coupling = 0.0);

}  // namespace drivestat
