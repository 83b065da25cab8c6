#pragma once

// Marching-squares level sets on 2-D density grids and even-odd
// point-in-polygon queries against the extracted contours.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "drivestat/kde.hpp"

namespace drivestat {

using Point2 = std::array<double, 2>;

struct Polyline {
  std::vector<Point2> points;
  bool closed = false;
};

struct LevelSetOptions {
  /// Treat the grid as surrounded by a ring of zeros so every contour closes
  /// (the ring sits one spacing outside the grid).
  bool close_at_boundary = false;
};

/// Contours of {value >= level} with linear interpolation along cell edges.
/// Saddle cells are resolved by the cell-centre average. Throws DomainError
/// when level is outside (0, max(grid)].
std::vector<Polyline> levelset_numeric(const DensityGrid& grid, double level, const LevelSetOptions& options = {});

/// Even-odd containment against a set of closed polylines. Open polylines are
/// ignored.
class ContourIndex {
 public:
  explicit ContourIndex(std::span<const Polyline> polylines, std::size_t strips = 1024);
  [[nodiscard]] bool contains(double x, double y) const;

 private:
  struct Segment {
    double x0, y0, x1, y1;
  };
  double y_lo_ = 0.0;
  double y_hi_ = 0.0;
  double strip_height_ = 1.0;
  std::vector<std::vector<Segment>> strips_;
};

/// Distance from a point to the nearest segment of any polyline.
double distance_to_polylines(const Point2& p, std::span<const Polyline> polylines);

/// Largest distance from any vertex of `from` to the polylines `to`.
double max_deviation(std::span<const Polyline> from, std::span<const Polyline> to);

/// Diagonal length of the axis-aligned box around every vertex (0 when empty).
double bounding_box_diagonal(std::span<const Polyline> polylines);

/// x,y per row; a blank line separates polylines. Closed polylines repeat
/// their first point at the end.
void write_polylines_csv(std::ostream& out, std::span<const Polyline> polylines);

/// Paths only, viewBox in data units with y pointing up.
void write_polylines_svg(std::ostream& out, std::span<const Polyline> polylines);

}  // namespace drivestat
