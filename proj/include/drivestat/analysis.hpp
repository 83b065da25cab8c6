#pragma once

// Empirical analyses on (ax, ay[, vx]) samples: quadrant decomposition,
// relative-density contours with enclosed mass, per-bin fit batteries,
// percentile tables and velocity-binned profiles.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drivestat/distributions.hpp"
#include "drivestat/fitselect.hpp"
#include "drivestat/kde.hpp"
#include "drivestat/levelset.hpp"
#include "drivestat/types.hpp"

namespace drivestat {

/// Column roles in a sample set: 0 ax, 1 ay, 2 vx.
enum class Axis : std::size_t { ax = 0, ay = 1, vx = 2 };
std::string_view to_string(Axis a);

enum class Section : int { brake = 0, forward = 1, left = 2, right = 3 };
std::string_view to_string(Section s);
inline constexpr std::array<Section, 4> kSections{Section::brake, Section::forward, Section::left, Section::right};

/// Magnitudes per section; ax = 0 goes to forward and ay = 0 to right.
struct QuadrantDataset {
  std::vector<double> brake;
  std::vector<double> forward;
  std::vector<double> left;
  std::vector<double> right;

  [[nodiscard]] const std::vector<double>& section(Section s) const;
  /// Left and right magnitudes together (lateral sides not distinguished).
  [[nodiscard]] std::vector<double> lateral() const;
};

QuadrantDataset decompose_quadrants(const PointSet& samples);

inline const std::vector<double> kRelativeContourLevels{1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.95};
inline const std::vector<double> kDefaultPercentiles{90.0, 99.0, 99.9, 99.99};
inline constexpr std::size_t kDefaultMinBinCount = 1000;
inline constexpr std::size_t kMinContourSamples = 1000;
inline constexpr double kAccelerationBinWidth = 0.5;  // m/s^2
inline constexpr double kVelocityBinWidth = 5.0;      // m/s

struct RelativeContour {
  double relative_level = 0.0;
  double absolute_level = 0.0;
  std::vector<Polyline> polylines;
  double mass_inside = 0.0;  ///< fraction of samples inside the contour
};

struct RelativeContourReport {
  double peak_density = 0.0;
  BandwidthMatrix bandwidth;
  std::vector<RelativeContour> contours;  ///< in the order the levels were given
};

RelativeContourReport relative_density_contours(const PointSet& samples, std::span<const double> levels,
                                                std::size_t nodes_per_axis = kDefaultNodes2d);

/// Edges lo, lo + width, ... up to the first edge >= max_value.
std::vector<double> uniform_edges(double lo, double width, double max_value);

/// Smallest order statistic whose empirical CDF reaches level/100.
double nearest_rank_percentile(std::span<const double> sorted, double level);

struct PercentileRow {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  /// One entry per level; empty optionals for underpopulated bins.
  std::vector<std::optional<double>> values;
  [[nodiscard]] bool present() const { return !values.empty() && values.front().has_value(); }
};

struct PercentileTable {
  Axis condition = Axis::ax;
  Axis target = Axis::ay;
  std::vector<double> edges;
  std::vector<double> levels;
  std::vector<PercentileRow> rows;
};

/// Percentiles of |target| in bins of |condition|.
PercentileTable percentile_by_interval(const PointSet& samples, Axis target, Axis condition,
                                       std::span<const double> edges,
                                       std::span<const double> levels = kDefaultPercentiles,
                                       std::size_t min_count = kDefaultMinBinCount);

struct BinFit {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<ModelRanking> ranking;  ///< absent for underpopulated bins
};

/// rank_models on |target| within bins of |condition|. Throws
/// DegenerateError when every bin is underpopulated.
std::vector<BinFit> conditional_fit_battery(const PointSet& samples, Axis condition, Axis target,
                                            std::span<const double> edges,
                                            std::size_t min_count = kDefaultMinBinCount);

struct SectionProfile {
  std::size_t count = 0;
  std::optional<GpdParams> fit;
  std::string diagnostic;
  std::vector<std::optional<double>> percentiles;
};

struct VelocityBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::array<SectionProfile, 4> sections;  ///< indexed by Section
};

struct VelocityProfileReport {
  std::vector<double> edges;
  std::vector<double> levels;
  std::vector<VelocityBin> bins;
  DensityGrid velocity_density;  ///< 1-D KDE of vx
};

/// Requires a 3-column sample set (ax, ay, vx) with vx >= 0.
VelocityProfileReport velocity_profile(const PointSet& samples, std::span<const double> edges,
                                       std::span<const double> levels = kDefaultPercentiles,
                                       std::size_t min_count = kDefaultMinBinCount);

}  // namespace drivestat
