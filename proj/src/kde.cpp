#include "drivestat/kde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>

#include "drivestat/error.hpp"
#include "drivestat/format.hpp"
#include "drivestat/simd/kernels.hpp"

namespace drivestat {
namespace {

constexpr std::size_t kDirectBudget = std::size_t{1} << 22;  // n * nodes
constexpr std::size_t kMaxFineCells1d = std::size_t{1} << 20;
constexpr std::size_t kMaxFineCells2d = std::size_t{1} << 22;
constexpr double kTruncation = 8.0;  // kernel support in bandwidths
constexpr double kFineBinsPerBandwidth = 4.0;

std::vector<double> linspace(const AxisSpec& a) {
  std::vector<double> out(a.nodes);
  const double step = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
  for (std::size_t i = 0; i < a.nodes; ++i) out[i] = a.lo + static_cast<double>(i) * step;
  out.back() = a.hi;
  return out;
}

void validate_spec(const GridSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2) throw GridError("grid must be 1-D or 2-D");
  for (const auto& a : spec.axes) {
    if (a.nodes < 2) throw GridError("grid axes need at least 2 nodes");
    if (!(a.hi > a.lo) || !std::isfinite(a.lo) || !std::isfinite(a.hi))
      throw GridError("grid axis range must be finite with hi > lo");
  }
}

// Per-axis layout of the refined binning grid.
struct FineAxis {
  double lo = 0.0;
  double step = 0.0;       // fine spacing
  std::size_t refine = 1;  // fine cells per output cell
  std::size_t cells = 0;   // number of fine nodes
  std::size_t taps_half = 0;
  std::vector<double> taps;  // symmetric kernel, length 2*taps_half + 1, includes 1/h normalization
};

// With cell_average the taps integrate the kernel over the output cell
// [x_j - D/2, x_j + D/2] instead of sampling it at x_j, so the Riemann mass
// stays exact however small h is relative to the output spacing D.
FineAxis make_fine_axis(const AxisSpec& a, double h, std::size_t max_refine, bool cell_average) {
  FineAxis f;
  const double coarse = (a.hi - a.lo) / static_cast<double>(a.nodes - 1);
  const double wanted = std::ceil(kFineBinsPerBandwidth * coarse / h);
  f.refine = static_cast<std::size_t>(std::clamp(wanted, 1.0, static_cast<double>(max_refine)));
  f.lo = a.lo;
  f.step = coarse / static_cast<double>(f.refine);
  f.cells = (a.nodes - 1) * f.refine + 1;
  const double half_cell = cell_average ? 0.5 * coarse : 0.0;
  f.taps_half = static_cast<std::size_t>(std::ceil((kTruncation * h + half_cell) / f.step));
  f.taps.resize(2 * f.taps_half + 1);
  const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  const double inv = 1.0 / (h * std::numbers::sqrt2);
  for (std::size_t t = 0; t <= f.taps_half; ++t) {
    const double u = static_cast<double>(t) * f.step;
    double k = 0.0;
    if (cell_average) {
      // erfc differences keep precision far out in the tail.
      k = 0.5 * (std::erfc((u - half_cell) * inv) - std::erfc((u + half_cell) * inv)) / coarse;
    } else {
      const double z = u / h;
      k = norm * std::exp(-0.5 * z * z);
    }
    f.taps[f.taps_half + t] = k;
    f.taps[f.taps_half - t] = k;
  }
  return f;
}

// Position of x on the fine axis: cell index and fractional offset. Returns
// false when x lies outside the axis.
bool locate(const FineAxis& f, double x, std::size_t& cell, double& frac) {
  const double t = (x - f.lo) / f.step;
  const double last = static_cast<double>(f.cells - 1);
  if (!(t >= 0.0 && t <= last)) return false;
  double c = std::floor(t);
  if (c >= last) c = last - 1.0;
  cell = static_cast<std::size_t>(c);
  frac = t - c;
  return true;
}

void check_coverage(const PointSet& samples, const GridSpec& spec) {
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t axis = 0; axis < samples.dim; ++axis) {
      const double v = samples.at(i, axis);
      if (!(v >= spec.axes[axis].lo && v <= spec.axes[axis].hi))
        throw GridError("kde_evaluate: sample " + std::to_string(i) + " outside grid on axis " +
                        std::to_string(axis));
    }
}

DensityGrid binned_1d(const PointSet& samples, double h, const GridSpec& spec, bool cell_average) {
  // Fixed-point weights make the bin totals exact integers, so the estimate
  // does not depend on sample order and duplicating a sample set leaves it
  // unchanged bit for bit.
  constexpr double kScale = 4294967296.0;  // 2^32
  const AxisSpec& a = spec.axes[0];
  const FineAxis f = make_fine_axis(a, h, std::max<std::size_t>(1, kMaxFineCells1d / a.nodes), cell_average);
  std::vector<std::uint64_t> counts(f.cells, 0);
  for (const double x : samples.coords) {
    std::size_t cell = 0;
    double frac = 0.0;
    if (!locate(f, x, cell, frac)) continue;
    const auto right = static_cast<std::uint64_t>(std::llround(frac * kScale));
    counts[cell] += static_cast<std::uint64_t>(kScale) - right;
    counts[cell + 1] += right;
  }
  std::vector<double> padded(f.cells + 2 * f.taps_half, 0.0);
  for (std::size_t b = 0; b < f.cells; ++b) padded[b + f.taps_half] = static_cast<double>(counts[b]);

  DensityGrid grid = DensityGrid::zeros(spec);
  const double denom = static_cast<double>(samples.size()) * kScale;
  const auto& k = simd::active();
  auto& out = grid.values();
  for (std::size_t j = 0; j < a.nodes; ++j)
    out[j] = k.dot(padded.data() + j * f.refine, f.taps.data(), f.taps.size()) / denom;
  return grid;
}

DensityGrid binned_2d(const PointSet& samples, double hx, double hy, const GridSpec& spec, bool cell_average) {
  constexpr double kAxisScale = 65536.0;  // 2^16 per axis
  const AxisSpec& ax = spec.axes[0];
  const AxisSpec& ay = spec.axes[1];
  const auto per_axis_cap = static_cast<std::size_t>(std::sqrt(static_cast<double>(kMaxFineCells2d)));
  const FineAxis fx = make_fine_axis(ax, hx, std::max<std::size_t>(1, per_axis_cap / ax.nodes), cell_average);
  const FineAxis fy = make_fine_axis(ay, hy, std::max<std::size_t>(1, per_axis_cap / ay.nodes), cell_average);

  // counts laid out [by][bx]
  std::vector<std::uint64_t> counts(fx.cells * fy.cells, 0);
  const auto full = static_cast<std::uint64_t>(kAxisScale);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::size_t cx = 0, cy = 0;
    double tx = 0.0, ty = 0.0;
    if (!locate(fx, samples.at(i, 0), cx, tx) || !locate(fy, samples.at(i, 1), cy, ty)) continue;
    const auto rx = static_cast<std::uint64_t>(std::llround(tx * kAxisScale));
    const auto ry = static_cast<std::uint64_t>(std::llround(ty * kAxisScale));
    const std::uint64_t lx = full - rx;
    const std::uint64_t ly = full - ry;
    counts[cy * fx.cells + cx] += lx * ly;
    counts[cy * fx.cells + cx + 1] += rx * ly;
    counts[(cy + 1) * fx.cells + cx] += lx * ry;
    counts[(cy + 1) * fx.cells + cx + 1] += rx * ry;
  }

  const auto& k = simd::active();
  // Pass 1: convolve each fine row along x at the output columns.
  // tmp laid out [jx][by] with padding along by.
  const std::size_t tmp_stride = fy.cells + 2 * fy.taps_half;
  std::vector<double> tmp(ax.nodes * tmp_stride, 0.0);
  std::vector<double> row(fx.cells + 2 * fx.taps_half, 0.0);
  for (std::size_t by = 0; by < fy.cells; ++by) {
    bool any = false;
    for (std::size_t bx = 0; bx < fx.cells; ++bx) {
      const std::uint64_t c = counts[by * fx.cells + bx];
      row[bx + fx.taps_half] = static_cast<double>(c);
      any = any || c != 0;
    }
    if (!any) continue;
    for (std::size_t jx = 0; jx < ax.nodes; ++jx)
      tmp[jx * tmp_stride + by + fy.taps_half] =
          k.dot(row.data() + jx * fx.refine, fx.taps.data(), fx.taps.size());
  }
  // Pass 2: along y.
  DensityGrid grid = DensityGrid::zeros(spec);
  const double denom = static_cast<double>(samples.size()) * kAxisScale * kAxisScale;
  auto& out = grid.values();
  for (std::size_t jy = 0; jy < ay.nodes; ++jy)
    for (std::size_t jx = 0; jx < ax.nodes; ++jx)
      out[jy * ax.nodes + jx] =
          k.dot(tmp.data() + jx * tmp_stride + jy * fy.refine, fy.taps.data(), fy.taps.size()) / denom;
  return grid;
}

PointSet canonical_order(const PointSet& samples) {
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t axis = 0; axis < d; ++axis) {
      const double va = samples.at(a, axis);
      const double vb = samples.at(b, axis);
      if (va != vb) return va < vb;
    }
    return false;
  });
  PointSet out;
  out.dim = d;
  out.coords.reserve(samples.coords.size());
  for (const std::size_t i : idx)
    for (std::size_t axis = 0; axis < d; ++axis) out.coords.push_back(samples.at(i, axis));
  return out;
}

DensityGrid direct_1d(const PointSet& samples, double h, const GridSpec& spec) {
  const PointSet sorted = canonical_order(samples);
  DensityGrid grid = DensityGrid::zeros(spec);
  simd::active().gauss_sum(grid.axis(0), sorted.coords, 1.0 / h, grid.values());
  const double norm = static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi);
  for (auto& v : grid.values()) v /= norm;
  return grid;
}

DensityGrid direct_2d(const PointSet& samples, double hx, double hy, const GridSpec& spec) {
  const PointSet sorted = canonical_order(samples);
  const std::size_t n = sorted.size();
  DensityGrid grid = DensityGrid::zeros(spec);
  const auto& k = simd::active();
  auto factors = [&](std::size_t axis, double h) {
    const auto& nodes = grid.axis(axis);
    std::vector<double> arg(n);
    std::vector<double> out(nodes.size() * n);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double z = (nodes[j] - sorted.at(i, axis)) / h;
        arg[i] = -0.5 * z * z;
      }
      k.exp(arg, std::span<double>(out.data() + j * n, n));
    }
    return out;
  };
  const std::vector<double> ex = factors(0, hx);
  const std::vector<double> ey = factors(1, hy);
  const double norm = static_cast<double>(n) * 2.0 * std::numbers::pi * hx * hy;
  auto& out = grid.values();
  for (std::size_t jy = 0; jy < grid.ny(); ++jy)
    for (std::size_t jx = 0; jx < grid.nx(); ++jx)
      out[jy * grid.nx() + jx] = k.dot(ex.data() + jx * n, ey.data() + jy * n, n) / norm;
  return grid;
}

}  // namespace

BandwidthMatrix BandwidthMatrix::from_bandwidths(std::span<const double> h) {
  BandwidthMatrix H;
  H.diag.reserve(h.size());
  for (const double v : h) H.diag.push_back(v * v);
  validate(H);
  return H;
}

double BandwidthMatrix::bandwidth(std::size_t axis) const { return std::sqrt(diag.at(axis)); }

double BandwidthMatrix::determinant() const {
  double det = 1.0;
  for (const double v : diag) det *= v;
  return det;
}

void validate(const BandwidthMatrix& H) {
  if (H.diag.empty() || H.diag.size() > 2) throw ParameterError("bandwidth matrix must be 1x1 or 2x2");
  for (const double v : H.diag)
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("bandwidth entries must be finite and > 0");
}

DensityGrid::DensityGrid(std::vector<std::vector<double>> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > 2) throw GridError("density grid must be 1-D or 2-D");
  std::size_t expected = 1;
  for (const auto& a : axes_) {
    if (a.size() < 2) throw GridError("density grid axes need at least 2 nodes");
    expected *= a.size();
  }
  if (values_.size() != expected) throw GridError("density grid value count does not match axes");
}

DensityGrid DensityGrid::zeros(const GridSpec& spec) {
  validate_spec(spec);
  std::vector<std::vector<double>> axes;
  std::size_t count = 1;
  for (const auto& a : spec.axes) {
    axes.push_back(linspace(a));
    count *= a.nodes;
  }
  return {std::move(axes), std::vector<double>(count, 0.0)};
}

double DensityGrid::spacing(std::size_t i) const {
  const auto& a = axes_.at(i);
  return (a.back() - a.front()) / static_cast<double>(a.size() - 1);
}

double DensityGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= spacing(i);
  return v;
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (const double v : values_) s += v;
  return s * cell_volume();
}

double DensityGrid::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

bool DensityGrid::same_axes(const DensityGrid& other) const { return axes_ == other.axes_; }

GridSpec DensityGrid::spec() const {
  GridSpec s;
  for (const auto& a : axes_) s.axes.push_back({a.front(), a.back(), a.size()});
  return s;
}

double gaussian_kernel(std::span<const double> offset, const BandwidthMatrix& H) {
  validate(H);
  if (offset.size() != H.dim()) throw ParameterError("gaussian_kernel: dimension mismatch");
  double quad = 0.0;
  for (std::size_t i = 0; i < offset.size(); ++i) quad += offset[i] * offset[i] / H.diag[i];
  const double d = static_cast<double>(offset.size());
  return std::pow(2.0 * std::numbers::pi, -d / 2.0) / std::sqrt(H.determinant()) * std::exp(-0.5 * quad);
}

GridSpec make_grid_spec(const PointSet& samples, const BandwidthMatrix& H, std::size_t nodes_per_axis,
                        double margin) {
  if (samples.empty()) throw DegenerateError("make_grid_spec: no samples");
  if (H.dim() != samples.dim) throw ParameterError("make_grid_spec: dimension mismatch");
  const std::size_t nodes = nodes_per_axis != 0 ? nodes_per_axis
                                                : (samples.dim == 1 ? kDefaultNodes1d : kDefaultNodes2d);
  GridSpec spec;
  for (std::size_t axis = 0; axis < samples.dim; ++axis) {
    double mn = samples.at(0, axis), mx = mn;
    for (std::size_t i = 1; i < samples.size(); ++i) {
      mn = std::min(mn, samples.at(i, axis));
      mx = std::max(mx, samples.at(i, axis));
    }
    const double pad = margin * H.bandwidth(axis);
    spec.axes.push_back({mn - pad, mx + pad, nodes});
  }
  return spec;
}

DensityGrid kde_evaluate(const PointSet& samples, const BandwidthMatrix& H, const GridSpec& grid,
                         const KdeOptions& options) {
  if (samples.empty()) throw DegenerateError("kde_evaluate: empty sample set");
  validate(H);
  validate_spec(grid);
  if (samples.dim != H.dim() || samples.dim != grid.axes.size())
    throw ParameterError("kde_evaluate: dimension mismatch between samples, bandwidth and grid");
  for (const double v : samples.coords)
    if (!std::isfinite(v)) throw DegenerateError("kde_evaluate: non-finite sample");
  if (options.require_coverage) check_coverage(samples, grid);

  std::size_t nodes = 1;
  for (const auto& a : grid.axes) nodes *= a.nodes;
  KdeMethod method = options.method;
  if (options.cell_average) method = KdeMethod::binned;
  if (method == KdeMethod::automatic)
    method = samples.size() * nodes <= kDirectBudget ? KdeMethod::direct : KdeMethod::binned;

  if (samples.dim == 1) {
    const double h = H.bandwidth(0);
    return method == KdeMethod::direct ? direct_1d(samples, h, grid) : binned_1d(samples, h, grid, options.cell_average);
  }
  const double hx = H.bandwidth(0), hy = H.bandwidth(1);
  return method == KdeMethod::direct ? direct_2d(samples, hx, hy, grid)
                                     : binned_2d(samples, hx, hy, grid, options.cell_average);
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const auto& axis = grid.axis(a);
    for (std::size_t i = 0; i < axis.size(); ++i) out << (i ? "," : "") << format_g9(axis[i]);
    out << '\n';
  }
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) out << (ix ? "," : "") << format_g9(grid.value(ix, iy));
    out << '\n';
  }
}

}  // namespace drivestat
