#include "drivestat/bivariate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "drivestat/error.hpp"

namespace drivestat {
namespace {

bool exp_limit(double k) { return std::fabs(k) < kGpdShapeTolerance; }

// Magnitude at which the GPD log-density equals log_density.
double inverse_logpdf(const GpdParams& p, double log_density) {
  const double rel = log_density + std::log(p.sigma);  // <= 0 inside the range
  if (exp_limit(p.k)) return -p.sigma * rel;
  return p.sigma / p.k * std::expm1(-p.k / (1.0 + p.k) * rel);
}

void require_contour_shape(const GpdParams& p) {
  validate(p);
  if (!(p.k > -1.0)) throw ParameterError("contour: shape must exceed -1 so the density decreases in magnitude");
}

}  // namespace

void validate(const BndmParams& p) {
  if (!(p.sigma_nx > 0.0) || !(p.sigma_ny > 0.0)) throw ParameterError("bndm: scales must be > 0");
}

double bndm_pdf(double x, double y, const BndmParams& p) {
  validate(p);
  const double zx = x / p.sigma_nx, zy = y / p.sigma_ny;
  return std::exp(-zx * zx - zy * zy) / (2.0 * std::numbers::pi * p.sigma_nx * p.sigma_ny);
}

double bndm_peak(const BndmParams& p) {
  validate(p);
  return 1.0 / (2.0 * std::numbers::pi * p.sigma_nx * p.sigma_ny);
}

double bndm_eta(double level, const BndmParams& p) {
  validate(p);
  if (!(level > 0.0) || level > bndm_peak(p))
    throw DomainError("bndm_contour: level must lie in (0, peak]; got " + std::to_string(level));
  return std::max(0.0, -std::log(2.0 * std::numbers::pi * p.sigma_nx * p.sigma_ny * level));
}

Polyline bndm_contour(double level, const BndmParams& p, std::size_t points) {
  const double eta = bndm_eta(level, p);
  Polyline line;
  if (eta == 0.0) {
    line.points.push_back({0.0, 0.0});
    return line;
  }
  const double a = p.sigma_nx * std::sqrt(eta), b = p.sigma_ny * std::sqrt(eta);
  points = std::max<std::size_t>(points, 3);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(points);
    line.points.push_back({a * std::cos(t), b * std::sin(t)});
  }
  line.closed = true;
  return line;
}

BpdmParams BpdmParams::reference() {
  BpdmParams p;
  p.brake = {0.09, 0.47};
  p.forward = {-0.043, 0.47};
  p.left = {0.3, 0.136};
  p.right = {0.3, 0.136};
  return p;
}

BpdmParams BpdmParams::fitted_sections() {
  BpdmParams p;
  p.brake = {0.0894, 0.4544};
  p.forward = {-0.0429, 0.5063};
  p.left = {0.2978, 0.1370};
  p.right = {0.3177, 0.1356};
  return p;
}

const GpdParams& BpdmParams::x_params(Quadrant q) const {
  return (q == Quadrant::brake_left || q == Quadrant::brake_right) ? brake : forward;
}

const GpdParams& BpdmParams::y_params(Quadrant q) const {
  return (q == Quadrant::brake_left || q == Quadrant::forward_left) ? left : right;
}

void validate(const BpdmParams& p) {
  for (const GpdParams* g : {&p.brake, &p.forward, &p.left, &p.right}) validate(*g);
  double sum = 0.0;
  for (const double w : p.weights) {
    if (!(w >= 0.0)) throw ParameterError("bpdm: quadrant weights must be >= 0");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ParameterError("bpdm: quadrant weights must sum to 1");
}

Quadrant quadrant_of(double ax, double ay) {
  const bool fwd = ax >= 0.0, right = ay >= 0.0;
  return static_cast<Quadrant>((fwd ? 2 : 0) + (right ? 1 : 0));
}

double bpdm_pdf(double ax, double ay, const BpdmParams& p) {
  validate(p);
  const Quadrant q = quadrant_of(ax, ay);
  const double w = p.weights[static_cast<int>(q)];
  if (w == 0.0) return 0.0;
  return w * gpd_pdf(std::fabs(ax), p.x_params(q)) * gpd_pdf(std::fabs(ay), p.y_params(q));
}

double bpdm_peak(const BpdmParams& p) {
  validate(p);
  double peak = 0.0;
  for (int q = 0; q < 4; ++q) {
    const auto quad = static_cast<Quadrant>(q);
    peak = std::max(peak, p.weights[q] / (p.x_params(quad).sigma * p.y_params(quad).sigma));
  }
  return peak;
}

ContourConstants contour_constants(double level, const GpdParams& qx, const GpdParams& qy, OmegaSign sign) {
  validate(qx);
  validate(qy);
  ContourConstants c;
  c.lambda_x = qx.k / qx.sigma;
  c.lambda_y = qy.k / qy.sigma;
  const double exponent = qy.k / (1.0 + qy.k) * (sign == OmegaSign::derived ? -1.0 : 1.0);
  c.omega_y = std::pow(qx.sigma * qy.sigma * level, exponent);
  c.gamma = -qy.k * (qx.k + 1.0) / (qx.k * (qy.k + 1.0));
  return c;
}

Polyline bpdm_contour_analytic(double level, const GpdParams& qx, const GpdParams& qy, std::size_t points,
                               OmegaSign sign) {
  require_contour_shape(qx);
  require_contour_shape(qy);
  const double peak = 1.0 / (qx.sigma * qy.sigma);
  if (!(level > 0.0) || level > peak)
    throw DomainError("bpdm_contour: level must lie in (0, " + std::to_string(peak) + "]");
  points = std::max<std::size_t>(points, 2);

  const double log_level = std::log(level);
  // y = 0 where f_x(x) = level * sigma_y.
  const double x_max = inverse_logpdf(qx, log_level + std::log(qy.sigma));
  const bool closed_form = !exp_limit(qx.k) && !exp_limit(qy.k);
  const ContourConstants c = closed_form ? contour_constants(level, qx, qy, sign) : ContourConstants{};

  Polyline line;
  line.points.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    double x = x_max * static_cast<double>(i) / static_cast<double>(points - 1);
    if (i + 1 == points) x = x_max;
    double y;
    if (closed_form) {
      y = (c.omega_y * std::pow(1.0 + c.lambda_x * x, c.gamma) - 1.0) / c.lambda_y;
    } else {
      y = inverse_logpdf(qy, log_level - gpd_logpdf(x, qx));
    }
    line.points.push_back({x, std::max(y, 0.0)});
  }
  return line;
}

double contour_residual(const Polyline& curve, double level, const GpdParams& qx, const GpdParams& qy) {
  double worst = 0.0;
  for (const auto& pt : curve.points) {
    double f = 0.0;
    if (qx.in_support(pt[0]) && qy.in_support(pt[1])) f = gpd_pdf(pt[0], qx) * gpd_pdf(pt[1], qy);
    worst = std::max(worst, std::fabs(f - level) / level);
  }
  return worst;
}

std::vector<Polyline> bpdm_contour(double level, const BpdmParams& p, std::size_t points) {
  validate(p);
  std::vector<Polyline> out;
  for (int q = 0; q < 4; ++q) {
    const double w = p.weights[q];
    if (w == 0.0) continue;
    const auto quad = static_cast<Quadrant>(q);
    const GpdParams& qx = p.x_params(quad);
    const GpdParams& qy = p.y_params(quad);
    const double product_level = level / w;
    if (product_level > 1.0 / (qx.sigma * qy.sigma)) continue;
    Polyline line = bpdm_contour_analytic(product_level, qx, qy, points);
    const double sx = q < 2 ? -1.0 : 1.0;
    const double sy = (q % 2 == 0) ? -1.0 : 1.0;
    for (auto& pt : line.points) pt = {sx * pt[0], sy * pt[1]};
    out.push_back(std::move(line));
  }
  return out;
}

BpdmDraw bpdm_draw(Rng& rng, const BpdmParams& p, double common_scale, double coupling) {
  const double u = rng.uniform();
  int q = 0;
  double cum = p.weights[0];
  while (q < 3 && !(u < cum)) cum += p.weights[++q];
  while (q > 0 && p.weights[q] == 0.0) --q;  // rounding in the cumulative sum
  const auto quad = static_cast<Quadrant>(q);
  GpdParams gx = p.x_params(quad);
  gx.sigma *= common_scale;
  const double mx = gpd_draw(rng, gx);
  GpdParams gy = p.y_params(quad);
  gy.sigma *= common_scale * (1.0 + coupling * mx);
  const double my = gpd_draw(rng, gy);
  return {q < 2 ? -mx : mx, (q % 2 == 0) ? -my : my};
}

PointSet bpdm_sample(std::size_t n, const BpdmParams& p, std::uint64_t seed) {
  validate(p);
  if (n == 0) throw ParameterError("bpdm_sample: n must be >= 1");
  Rng rng(seed);
  PointSet out(2, {});
  out.coords.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const BpdmDraw d = bpdm_draw(rng, p);
    out.coords.push_back(d.ax);
    out.coords.push_back(d.ay);
  }
  return out;
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  v.back() = hi;
  return v;
}

DensityGrid sample_density(double x0, double x1, double y0, double y1, std::size_t nodes,
                           const std::function<double(double, double)>& f) {
  auto xs = linspace(x0, x1, nodes);
  auto ys = linspace(y0, y1, nodes);
  std::vector<double> values(nodes * nodes);
  for (std::size_t iy = 0; iy < nodes; ++iy)
    for (std::size_t ix = 0; ix < nodes; ++ix) values[iy * nodes + ix] = f(xs[ix], ys[iy]);
  return DensityGrid({std::move(xs), std::move(ys)}, std::move(values));
}

void finish(ContourCheck& c, const DensityGrid& grid, double level) {
  c.numeric = levelset_numeric(grid, level);
  c.diagonal = bounding_box_diagonal(c.analytic);
  c.max_deviation = max_deviation(c.analytic, c.numeric);
}

void require_nodes(std::size_t nodes) {
  if (nodes < 3) throw ParameterError("contour check: need at least 3 nodes per axis");
}

}  // namespace

ContourCheck check_quadrant_contour(double level, const GpdParams& qx, const GpdParams& qy, OmegaSign sign,
                                    std::size_t nodes) {
  require_nodes(nodes);
  ContourCheck c;
  c.analytic.push_back(bpdm_contour_analytic(level, qx, qy, kDefaultContourPoints, sign));
  double xm = 0.0, ym = 0.0;
  for (const auto& p : c.analytic.front().points) {
    xm = std::max(xm, p[0]);
    ym = std::max(ym, p[1]);
  }
  if (!(xm > 0.0 && ym > 0.0)) throw DomainError("contour check: contour collapses to a point");
  const DensityGrid grid = sample_density(0.0, 1.05 * xm, 0.0, 1.05 * ym, nodes, [&](double x, double y) {
    return gpd_pdf(x, qx) * gpd_pdf(y, qy);
  });
  finish(c, grid, level);
  return c;
}

ContourCheck check_bpdm_contour(double level, const BpdmParams& p, std::size_t nodes) {
  require_nodes(nodes);
  ContourCheck c;
  c.analytic = bpdm_contour(level, p);
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& line : c.analytic)
    for (const auto& q : line.points) {
      x0 = std::min(x0, q[0]);
      x1 = std::max(x1, q[0]);
      y0 = std::min(y0, q[1]);
      y1 = std::max(y1, q[1]);
    }
  if (!(x1 > x0 && y1 > y0)) throw DomainError("contour check: contour collapses to a point");
  const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  const DensityGrid grid = sample_density(x0 - px, x1 + px, y0 - py, y1 + py, nodes,
                                          [&](double x, double y) { return bpdm_pdf(x, y, p); });
  finish(c, grid, level);
  return c;
}

ContourCheck check_bndm_contour(double level, const BndmParams& p, std::size_t nodes) {
  require_nodes(nodes);
  ContourCheck c;
  c.analytic.push_back(bndm_contour(level, p));
  const double eta = bndm_eta(level, p);
  if (!(eta > 0.0)) throw DomainError("contour check: contour collapses to a point");
  const double ax = 1.05 * p.sigma_nx * std::sqrt(eta), ay = 1.05 * p.sigma_ny * std::sqrt(eta);
  const DensityGrid grid =
      sample_density(-ax, ax, -ay, ay, nodes, [&](double x, double y) { return bndm_pdf(x, y, p); });
  finish(c, grid, level);
  return c;
}

}  // namespace drivestat
