#pragma once

// Gaussian kernel density estimation on regular grids with a diagonal
// bandwidth matrix and the diffusion-based plug-in bandwidth selector.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "drivestat/types.hpp"

namespace drivestat {

/// Diagonal bandwidth matrix; `diag` holds squared per-axis bandwidths.
struct BandwidthMatrix {
  std::vector<double> diag;

  static BandwidthMatrix from_bandwidths(std::span<const double> h);
  [[nodiscard]] std::size_t dim() const { return diag.size(); }
  [[nodiscard]] double bandwidth(std::size_t axis) const;
  [[nodiscard]] double determinant() const;
};

void validate(const BandwidthMatrix& H);

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t nodes = 512;
};

struct GridSpec {
  std::vector<AxisSpec> axes;
};

inline constexpr std::size_t kDefaultNodes1d = 512;
inline constexpr std::size_t kDefaultNodes2d = 128;
inline constexpr double kDefaultGridMargin = 3.0;

/// Density values on a regular 1-D or 2-D grid. For 2-D grids the value at
/// (ix, iy) lives at values[iy * nx + ix]: rows run along the second axis.
class DensityGrid {
 public:
  DensityGrid() = default;
  DensityGrid(std::vector<std::vector<double>> axes, std::vector<double> values);

  /// Builds equally spaced axes from a spec and fills values with zero.
  static DensityGrid zeros(const GridSpec& spec);

  [[nodiscard]] std::size_t dim() const { return axes_.size(); }
  [[nodiscard]] const std::vector<double>& axis(std::size_t i) const { return axes_.at(i); }
  [[nodiscard]] std::size_t nx() const { return axes_.at(0).size(); }
  [[nodiscard]] std::size_t ny() const { return dim() > 1 ? axes_[1].size() : 1; }
  [[nodiscard]] double spacing(std::size_t i) const;
  [[nodiscard]] double cell_volume() const;

  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  [[nodiscard]] double value(std::size_t ix, std::size_t iy = 0) const { return values_[iy * nx() + ix]; }

  /// Riemann-sum mass: sum(values) * cell_volume.
  [[nodiscard]] double mass() const;
  [[nodiscard]] double max_value() const;
  [[nodiscard]] bool same_axes(const DensityGrid& other) const;
  [[nodiscard]] GridSpec spec() const;

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
};

/// (2 pi)^(-d/2) |H|^(-1/2) exp(-1/2 u^T H^-1 u) for a diagonal H.
double gaussian_kernel(std::span<const double> offset, const BandwidthMatrix& H);

struct BandwidthSelection {
  double bandwidth = 0.0;
  bool used_fallback = false;  ///< normal-reference rule instead of the fixed point
};

inline constexpr std::size_t kMinBandwidthSamples = 50;

/// Diffusion plug-in selector (fixed point of the improved Sheather-Jones
/// functional on 2^14 bins); falls back to the normal-reference rule with a
/// warning when no root can be bracketed.
BandwidthSelection select_bandwidth_1d_detailed(std::span<const double> samples);
double select_bandwidth_1d(std::span<const double> samples);

/// (4 / 3n)^(1/5) * sample standard deviation.
double normal_reference_bandwidth(std::span<const double> samples);
/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Per-axis plug-in selection (diagonal matrix). For d >= 2 each 1-D
/// bandwidth is rescaled from the univariate n^(-1/5) rate to the
/// d-variate n^(-1/(d+4)) rate by the ratio of normal-reference rules.
BandwidthMatrix select_bandwidth(const PointSet& samples);

/// Axis ranges [min - margin*h, max + margin*h] with the given node counts
/// (0 picks the default for the dimension).
GridSpec make_grid_spec(const PointSet& samples, const BandwidthMatrix& H, std::size_t nodes_per_axis = 0,
                        double margin = kDefaultGridMargin);

enum class KdeMethod {
  automatic,  ///< direct when n * nodes is small, binned otherwise
  direct,     ///< exact kernel sum at every node
  binned,     ///< fixed-point linear binning on a refined grid + truncated convolution
};

struct KdeOptions {
  KdeMethod method = KdeMethod::automatic;
  /// When false, samples outside the grid are dropped and their mass leaks.
  bool require_coverage = true;
  /// Report the kernel mass of each output cell divided by its volume
  /// rather than the density at the node. Keeps the grid mass exact when the
  /// bandwidth is far below the node spacing. Implies the binned method.
  bool cell_average = false;
};

DensityGrid kde_evaluate(const PointSet& samples, const BandwidthMatrix& H, const GridSpec& grid,
                         const KdeOptions& options = {});

/// Axis coordinates (one line per axis), then one line of values per row.
void write_grid_csv(std::ostream& out, const DensityGrid& grid);

}  // namespace drivestat
