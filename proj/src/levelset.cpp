#include "drivestat/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "drivestat/error.hpp"
#include "drivestat/format.hpp"

namespace drivestat {
namespace {

// Edge numbering inside a cell: 0 bottom, 1 right, 2 top, 3 left.
// Pairs of edges joined by a segment for each corner mask (bit i = corner i
// inside, corners 0 bl, 1 br, 2 tr, 3 tl). Saddles 5 and 10 handled apart.
constexpr int kSegments[16][4] = {
    {-1, -1, -1, -1}, {3, 0, -1, -1}, {0, 1, -1, -1}, {3, 1, -1, -1}, {1, 2, -1, -1}, {-1, -1, -1, -1},
    {0, 2, -1, -1},   {3, 2, -1, -1}, {2, 3, -1, -1}, {0, 2, -1, -1}, {-1, -1, -1, -1}, {1, 2, -1, -1},
    {3, 1, -1, -1},   {0, 1, -1, -1}, {3, 0, -1, -1}, {-1, -1, -1, -1}};

struct Field {
  std::vector<double> xs, ys, v;  // v[iy * nx + ix]
  [[nodiscard]] std::size_t nx() const { return xs.size(); }
  [[nodiscard]] std::size_t ny() const { return ys.size(); }
  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return v[iy * nx() + ix]; }
};

Field make_field(const DensityGrid& grid, bool pad) {
  Field f;
  if (!pad) {
    f.xs = grid.axis(0);
    f.ys = grid.axis(1);
    f.v = grid.values();
    return f;
  }
  const double dx = grid.spacing(0), dy = grid.spacing(1);
  f.xs.push_back(grid.axis(0).front() - dx);
  f.xs.insert(f.xs.end(), grid.axis(0).begin(), grid.axis(0).end());
  f.xs.push_back(grid.axis(0).back() + dx);
  f.ys.push_back(grid.axis(1).front() - dy);
  f.ys.insert(f.ys.end(), grid.axis(1).begin(), grid.axis(1).end());
  f.ys.push_back(grid.axis(1).back() + dy);
  f.v.assign(f.xs.size() * f.ys.size(), 0.0);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy)
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) f.v[(iy + 1) * f.xs.size() + ix + 1] = grid.value(ix, iy);
  return f;
}

class Tracer {
 public:
  Tracer(const Field& f, double level) : f_(f), level_(level) {}

  std::vector<Polyline> run() {
    const std::size_t nx = f_.nx(), ny = f_.ny();
    for (std::size_t iy = 0; iy + 1 < ny; ++iy)
      for (std::size_t ix = 0; ix + 1 < nx; ++ix) cell(ix, iy);

    std::vector<bool> used(segs_.size(), false);
    std::vector<Polyline> out;
    // Open chains start at crossings owned by a single segment.
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      if (used[s]) continue;
      for (const std::size_t end : {segs_[s][0], segs_[s][1]})
        if (!used[s] && by_edge_.at(end).size() == 1) out.push_back(trace(s, end, used, false));
    }
    for (std::size_t s = 0; s < segs_.size(); ++s)
      if (!used[s]) out.push_back(trace(s, segs_[s][0], used, true));
    return out;
  }

 private:
  [[nodiscard]] bool inside(std::size_t ix, std::size_t iy) const { return f_.at(ix, iy) >= level_; }

  // Global id of a cell edge.
  [[nodiscard]] std::size_t edge_id(std::size_t ix, std::size_t iy, int e) const {
    const std::size_t nx = f_.nx();
    const std::size_t horizontal = (nx - 1) * f_.ny();
    switch (e) {
      case 0:
        return iy * (nx - 1) + ix;
      case 2:
        return (iy + 1) * (nx - 1) + ix;
      case 3:
        return horizontal + iy * nx + ix;
      default:
        return horizontal + iy * nx + ix + 1;
    }
  }

  Point2 crossing(std::size_t ix, std::size_t iy, int e) const {
    std::size_t ax = ix, ay = iy, bx = ix, by = iy;
    switch (e) {
      case 0:
        bx = ix + 1;
        break;
      case 1:
        ax = ix + 1;
        bx = ix + 1;
        by = iy + 1;
        break;
      case 2:
        ay = iy + 1;
        bx = ix + 1;
        by = iy + 1;
        break;
      default:
        by = iy + 1;
        break;
    }
    const double va = f_.at(ax, ay), vb = f_.at(bx, by);
    const double t = va == vb ? 0.5 : std::clamp((level_ - va) / (vb - va), 0.0, 1.0);
    return {f_.xs[ax] + t * (f_.xs[bx] - f_.xs[ax]), f_.ys[ay] + t * (f_.ys[by] - f_.ys[ay])};
  }

  void add(std::size_t ix, std::size_t iy, int e0, int e1) {
    const std::size_t a = edge_id(ix, iy, e0), b = edge_id(ix, iy, e1);
    for (const auto& [id, e] : {std::pair{a, e0}, std::pair{b, e1}})
      if (!points_.contains(id)) points_.emplace(id, crossing(ix, iy, e));
    by_edge_[a].push_back(segs_.size());
    by_edge_[b].push_back(segs_.size());
    segs_.push_back({a, b});
  }

  void cell(std::size_t ix, std::size_t iy) {
    const int mask = (inside(ix, iy) ? 1 : 0) | (inside(ix + 1, iy) ? 2 : 0) | (inside(ix + 1, iy + 1) ? 4 : 0) |
                     (inside(ix, iy + 1) ? 8 : 0);
    if (mask == 5 || mask == 10) {
      const double centre = 0.25 * (f_.at(ix, iy) + f_.at(ix + 1, iy) + f_.at(ix + 1, iy + 1) + f_.at(ix, iy + 1));
      const bool joined = centre >= level_;
      if ((mask == 5) == joined) {
        add(ix, iy, 0, 1);
        add(ix, iy, 2, 3);
      } else {
        add(ix, iy, 3, 0);
        add(ix, iy, 1, 2);
      }
      return;
    }
    const int* s = kSegments[mask];
    if (s[0] >= 0) add(ix, iy, s[0], s[1]);
  }

  Polyline trace(std::size_t seg, std::size_t start_edge, std::vector<bool>& used, bool closed) {
    Polyline line;
    line.points.push_back(points_.at(start_edge));
    std::size_t edge = start_edge;
    while (true) {
      used[seg] = true;
      edge = segs_[seg][0] == edge ? segs_[seg][1] : segs_[seg][0];
      if (closed && edge == start_edge) break;
      line.points.push_back(points_.at(edge));
      std::size_t next = segs_.size();
      for (const std::size_t cand : by_edge_.at(edge))
        if (!used[cand]) next = cand;
      if (next == segs_.size()) break;
      seg = next;
    }
    line.closed = closed && line.points.size() >= 3;
    return line;
  }

  const Field& f_;
  double level_;
  std::vector<std::array<std::size_t, 2>> segs_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_edge_;
  std::unordered_map<std::size_t, Point2> points_;
};

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}

}  // namespace

std::vector<Polyline> levelset_numeric(const DensityGrid& grid, double level, const LevelSetOptions& options) {
  if (grid.dim() != 2) throw GridError("levelset_numeric: grid must be 2-D");
  const double peak = grid.max_value();
  if (!(level > 0.0 && level <= peak))
    throw DomainError("levelset_numeric: level " + std::to_string(level) + " outside (0, " + std::to_string(peak) +
                      "]");
  const Field f = make_field(grid, options.close_at_boundary);
  return Tracer(f, level).run();
}

ContourIndex::ContourIndex(std::span<const Polyline> polylines, std::size_t strips) {
  std::vector<Segment> segs;
  y_lo_ = std::numeric_limits<double>::infinity();
  y_hi_ = -y_lo_;
  for (const auto& line : polylines) {
    if (!line.closed) continue;
    const auto& pts = line.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2& a = pts[i];
      const Point2& b = pts[(i + 1) % pts.size()];
      segs.push_back({a[0], a[1], b[0], b[1]});
      y_lo_ = std::min({y_lo_, a[1], b[1]});
      y_hi_ = std::max({y_hi_, a[1], b[1]});
    }
  }
  if (segs.empty()) return;
  strips = std::max<std::size_t>(1, strips);
  strip_height_ = (y_hi_ - y_lo_) / static_cast<double>(strips);
  if (!(strip_height_ > 0.0)) strip_height_ = 1.0;
  strips_.resize(strips);
  for (const auto& s : segs) {
    const auto first = static_cast<std::size_t>(std::clamp(
        std::floor((std::min(s.y0, s.y1) - y_lo_) / strip_height_), 0.0, static_cast<double>(strips - 1)));
    const auto last = static_cast<std::size_t>(std::clamp(
        std::floor((std::max(s.y0, s.y1) - y_lo_) / strip_height_), 0.0, static_cast<double>(strips - 1)));
    for (std::size_t k = first; k <= last; ++k) strips_[k].push_back(s);
  }
}

bool ContourIndex::contains(double x, double y) const {
  if (strips_.empty() || y < y_lo_ || y > y_hi_) return false;
  const auto k = static_cast<std::size_t>(
      std::clamp(std::floor((y - y_lo_) / strip_height_), 0.0, static_cast<double>(strips_.size() - 1)));
  bool in = false;
  for (const auto& s : strips_[k]) {
    if ((s.y0 > y) != (s.y1 > y)) {
      const double xc = s.x0 + (y - s.y0) * (s.x1 - s.x0) / (s.y1 - s.y0);
      if (x < xc) in = !in;
    }
  }
  return in;
}

double distance_to_polylines(const Point2& p, std::span<const Polyline> polylines) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : polylines) {
    const auto& pts = line.points;
    if (pts.size() == 1) best = std::min(best, std::hypot(p[0] - pts[0][0], p[1] - pts[0][1]));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) best = std::min(best, segment_distance(p, pts[i], pts[i + 1]));
    if (line.closed && pts.size() > 2) best = std::min(best, segment_distance(p, pts.back(), pts.front()));
  }
  return best;
}

double max_deviation(std::span<const Polyline> from, std::span<const Polyline> to) {
  double worst = 0.0;
  for (const auto& line : from)
    for (const auto& p : line.points) worst = std::max(worst, distance_to_polylines(p, to));
  return worst;
}

double bounding_box_diagonal(std::span<const Polyline> polylines) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& line : polylines)
    for (const auto& p : line.points) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  return x1 >= x0 ? std::hypot(x1 - x0, y1 - y0) : 0.0;
}

void write_polylines_csv(std::ostream& out, std::span<const Polyline> polylines) {
  out << "x,y\n";
  bool first = true;
  for (const auto& line : polylines) {
    if (!first) out << '\n';
    first = false;
    for (const auto& p : line.points) out << format_g9(p[0]) << ',' << format_g9(p[1]) << '\n';
    if (line.closed && !line.points.empty())
      out << format_g9(line.points.front()[0]) << ',' << format_g9(line.points.front()[1]) << '\n';
  }
}

void write_polylines_svg(std::ostream& out, std::span<const Polyline> polylines) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& line : polylines)
    for (const auto& p : line.points) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  if (!std::isfinite(x0)) x0 = y0 = 0.0, x1 = y1 = 1.0;
  const double w = std::max(x1 - x0, 1e-9), h = std::max(y1 - y0, 1e-9);
  const double stroke = 0.002 * std::max(w, h);
  // Flip y so the plot reads with positive values upward.
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_g9(x0) << ' ' << format_g9(-y1) << ' '
      << format_g9(w) << ' ' << format_g9(h) << "\">\n";
  for (const auto& line : polylines) {
    if (line.points.empty()) continue;
    out << "  <path fill=\"none\" stroke=\"black\" stroke-width=\"" << format_g9(stroke) << "\" d=\"";
    for (std::size_t i = 0; i < line.points.size(); ++i)
      out << (i == 0 ? "M" : " L") << format_g9(line.points[i][0]) << ',' << format_g9(-line.points[i][1]);
    if (line.closed) out << " Z";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace drivestat
