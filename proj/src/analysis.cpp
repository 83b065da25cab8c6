#include "drivestat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drivestat/error.hpp"

namespace drivestat {
namespace {

void require_axes(const PointSet& samples, std::size_t needed, std::string_view who) {
  if (samples.dim < needed)
    throw DataError(std::string(who) + ": needs " + std::to_string(needed) + " columns, got " +
                    std::to_string(samples.dim));
}

void validate_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw ParameterError("bin edges need at least two values");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw ParameterError("bin edges must be strictly increasing");
}

void validate_levels(std::span<const double> levels) {
  for (const double l : levels)
    if (!(l > 0.0 && l <= 100.0)) throw ParameterError("percentile levels must lie in (0, 100]");
}

// Index of the half-open bin [e_i, e_i+1) holding v; the last bin is closed.
std::optional<std::size_t> bin_of(std::span<const double> edges, double v) {
  if (!(v >= edges.front() && v <= edges.back())) return std::nullopt;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  std::size_t i = static_cast<std::size_t>(it - edges.begin());
  if (i == edges.size()) --i;  // v == last edge
  return i - 1;
}

std::vector<std::vector<double>> split_by_bins(const PointSet& samples, Axis target, Axis condition,
                                               std::span<const double> edges) {
  std::vector<std::vector<double>> bins(edges.size() - 1);
  const auto t = static_cast<std::size_t>(target);
  const auto c = static_cast<std::size_t>(condition);
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (const auto b = bin_of(edges, std::fabs(samples.at(i, c)))) bins[*b].push_back(std::fabs(samples.at(i, t)));
  return bins;
}

std::vector<std::optional<double>> percentiles_of(std::vector<double> values, std::span<const double> levels,
                                                  std::size_t min_count) {
  std::vector<std::optional<double>> out(levels.size());
  if (values.size() < min_count || values.empty()) return out;
  std::sort(values.begin(), values.end());
  for (std::size_t l = 0; l < levels.size(); ++l) out[l] = nearest_rank_percentile(values, levels[l]);
  return out;
}

}  // namespace

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::ax:
      return "ax";
    case Axis::ay:
      return "ay";
    case Axis::vx:
      return "vx";
  }
  return "unknown";
}

std::string_view to_string(Section s) {
  switch (s) {
    case Section::brake:
      return "brake";
    case Section::forward:
      return "forward";
    case Section::left:
      return "left";
    case Section::right:
      return "right";
  }
  return "unknown";
}

const std::vector<double>& QuadrantDataset::section(Section s) const {
  switch (s) {
    case Section::brake:
      return brake;
    case Section::forward:
      return forward;
    case Section::left:
      return left;
    default:
      return right;
  }
}

std::vector<double> QuadrantDataset::lateral() const {
  std::vector<double> out(left);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

QuadrantDataset decompose_quadrants(const PointSet& samples) {
  require_axes(samples, 2, "decompose_quadrants");
  if (samples.empty()) throw DegenerateError("decompose_quadrants: no samples");
  QuadrantDataset q;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ax = samples.at(i, 0), ay = samples.at(i, 1);
    (ax < 0.0 ? q.brake : q.forward).push_back(std::fabs(ax));
    (ay < 0.0 ? q.left : q.right).push_back(std::fabs(ay));
  }
  return q;
}

RelativeContourReport relative_density_contours(const PointSet& samples, std::span<const double> levels,
                                                std::size_t nodes_per_axis) {
  require_axes(samples, 2, "relative_density_contours");
  if (samples.size() < kMinContourSamples)
    throw DegenerateError("relative_density_contours needs at least " + std::to_string(kMinContourSamples) +
                          " samples");
  for (const double l : levels)
    if (!(l > 0.0 && l <= 1.0)) throw ParameterError("relative levels must lie in (0, 1]");

  PointSet xy(2, {});
  xy.coords.reserve(2 * samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    xy.coords.push_back(samples.at(i, 0));
    xy.coords.push_back(samples.at(i, 1));
  }
  RelativeContourReport report;
  report.bandwidth = select_bandwidth(xy);
  const GridSpec spec = make_grid_spec(xy, report.bandwidth, nodes_per_axis);
  const DensityGrid density = kde_evaluate(xy, report.bandwidth, spec);
  report.peak_density = density.max_value();

  for (const double rel : levels) {
    RelativeContour c;
    c.relative_level = rel;
    c.absolute_level = rel * report.peak_density;
    c.polylines = levelset_numeric(density, c.absolute_level, {.close_at_boundary = true});
    const ContourIndex index(c.polylines);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < xy.size(); ++i)
      if (index.contains(xy.at(i, 0), xy.at(i, 1))) ++inside;
    c.mass_inside = static_cast<double>(inside) / static_cast<double>(xy.size());
    report.contours.push_back(std::move(c));
  }
  return report;
}

std::vector<double> uniform_edges(double lo, double width, double max_value) {
  if (!(width > 0.0)) throw ParameterError("bin width must be > 0");
  std::vector<double> edges{lo};
  for (std::size_t i = 1; edges.back() < max_value || edges.size() < 2; ++i)
    edges.push_back(lo + width * static_cast<double>(i));
  return edges;
}

double nearest_rank_percentile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw DegenerateError("percentile of an empty set");
  if (!(level > 0.0 && level <= 100.0)) throw ParameterError("percentile level must lie in (0, 100]");
  const double n = static_cast<double>(sorted.size());
  // Rounding guard: 99.99 / 100 * 10000 must give rank 9999, not 10000.
  auto rank = static_cast<std::size_t>(std::ceil(level / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

PercentileTable percentile_by_interval(const PointSet& samples, Axis target, Axis condition,
                                       std::span<const double> edges, std::span<const double> levels,
                                       std::size_t min_count) {
  const std::size_t needed = std::max(static_cast<std::size_t>(target), static_cast<std::size_t>(condition)) + 1;
  require_axes(samples, needed, "percentile_by_interval");
  validate_edges(edges);
  validate_levels(levels);
  PercentileTable table;
  table.condition = condition;
  table.target = target;
  table.edges.assign(edges.begin(), edges.end());
  table.levels.assign(levels.begin(), levels.end());
  auto bins = split_by_bins(samples, target, condition, edges);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    PercentileRow row;
    row.lo = edges[b];
    row.hi = edges[b + 1];
    row.count = bins[b].size();
    row.values = percentiles_of(std::move(bins[b]), levels, min_count);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<BinFit> conditional_fit_battery(const PointSet& samples, Axis condition, Axis target,
                                            std::span<const double> edges, std::size_t min_count) {
  const std::size_t needed = std::max(static_cast<std::size_t>(target), static_cast<std::size_t>(condition)) + 1;
  require_axes(samples, needed, "conditional_fit_battery");
  validate_edges(edges);
  const auto bins = split_by_bins(samples, target, condition, edges);
  std::vector<BinFit> out;
  bool any = false;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    BinFit fit{edges[b], edges[b + 1], bins[b].size(), std::nullopt};
    if (bins[b].size() >= std::max(min_count, kMinGpdSamples)) {
      fit.ranking = rank_models(bins[b]);
      any = true;
    }
    out.push_back(std::move(fit));
  }
  if (!any) throw DegenerateError("conditional_fit_battery: every bin holds fewer than " + std::to_string(min_count) +
                                  " samples");
  return out;
}

VelocityProfileReport velocity_profile(const PointSet& samples, std::span<const double> edges,
                                       std::span<const double> levels, std::size_t min_count) {
  if (samples.dim < 3) throw DataError("velocity_profile: samples carry no velocity column");
  if (samples.empty()) throw DegenerateError("velocity_profile: no samples");
  validate_edges(edges);
  validate_levels(levels);
  std::vector<double> v = samples.column(static_cast<std::size_t>(Axis::vx));
  for (const double x : v)
    if (!(x >= 0.0)) throw DomainError("velocity_profile: velocities must be >= 0");

  VelocityProfileReport report;
  report.edges.assign(edges.begin(), edges.end());
  report.levels.assign(levels.begin(), levels.end());

  const PointSet vset = PointSet::univariate(v);
  const BandwidthMatrix hv = select_bandwidth(vset);
  report.velocity_density = kde_evaluate(vset, hv, make_grid_spec(vset, hv), {KdeMethod::binned, false, true});

  std::vector<PointSet> per_bin(edges.size() - 1, PointSet(2, {}));
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (const auto b = bin_of(edges, v[i])) {
      per_bin[*b].coords.push_back(samples.at(i, 0));
      per_bin[*b].coords.push_back(samples.at(i, 1));
    }

  for (std::size_t b = 0; b < per_bin.size(); ++b) {
    VelocityBin bin;
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.count = per_bin[b].size();
    if (bin.count > 0) {
      const QuadrantDataset q = decompose_quadrants(per_bin[b]);
      for (const Section s : kSections) {
        SectionProfile& prof = bin.sections[static_cast<int>(s)];
        const auto& mags = q.section(s);
        prof.count = mags.size();
        prof.percentiles = percentiles_of(mags, levels, min_count);
        if (mags.size() < std::max(min_count, kMinGpdSamples)) {
          prof.diagnostic = "underpopulated";
          continue;
        }
        try {
          const FitReport rep = fit_gpd_mle(mags);
          if (rep.ok)
            prof.fit = std::get<GpdParams>(rep.theta);
          else
            prof.diagnostic = rep.diagnostic;
        } catch (const Error& e) {
          prof.diagnostic = e.what();
        }
      }
    } else {
      for (auto& prof : bin.sections) {
        prof.percentiles.assign(levels.size(), std::nullopt);
        prof.diagnostic = "underpopulated";
      }
    }
    report.bins.push_back(std::move(bin));
  }
  return report;
}

}  // namespace drivestat
