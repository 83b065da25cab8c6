#include "drivestat/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "drivestat/error.hpp"
#include "drivestat/format.hpp"
#include "drivestat/simd/kernels.hpp"

namespace drivestat {

double kl_divergence(const DensityGrid& f_new, const DensityGrid& f_old) {
  if (!f_new.same_axes(f_old)) throw GridError("kl_divergence: grids do not share axes");
  for (const DensityGrid* g : {&f_new, &f_old}) {
    const double m = g->mass();
    if (!(std::fabs(m - 1.0) <= kMassTolerance))
      throw GridError("kl_divergence: grid mass " + std::to_string(m) + " outside 1 +/- " +
                      std::to_string(kMassTolerance));
  }
  const double sum = simd::active().kl_terms(f_new.values(), f_old.values(), kDensityFloor);
  const double d = sum * f_new.cell_volume();
  if (d < 0.0 && d >= -1e-10) return 0.0;
  return d;
}

PointSetStream::PointSetStream(PointSet data, std::optional<std::uint64_t> shuffle_seed)
    : data_(std::move(data)) {
  if (!shuffle_seed) return;
  const std::size_t n = data_.size();
  const std::size_t d = data_.dim;
  std::mt19937_64 engine(*shuffle_seed);
  // Fisher-Yates over rows with an explicit index draw for portability.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    if (j == i - 1) continue;
    std::swap_ranges(data_.coords.begin() + static_cast<std::ptrdiff_t>((i - 1) * d),
                     data_.coords.begin() + static_cast<std::ptrdiff_t>(i * d),
                     data_.coords.begin() + static_cast<std::ptrdiff_t>(j * d));
  }
}

std::size_t PointSetStream::read(std::size_t max_rows, std::vector<double>& out) {
  const std::size_t rows = std::min(max_rows, data_.size() - cursor_);
  const auto first = data_.coords.begin() + static_cast<std::ptrdiff_t>(cursor_ * data_.dim);
  out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(rows * data_.dim));
  cursor_ += rows;
  return rows;
}

void validate(const ConvergenceConfig& cfg) {
  if (cfg.chunk_size < 1) throw ParameterError("convergence: chunk size must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw ParameterError("convergence: epsilon must be > 0");
  if (cfg.window < 1) throw ParameterError("convergence: window must be >= 1");
  if (!(cfg.margin >= 0.0)) throw ParameterError("convergence: margin must be >= 0");
  if (cfg.max_chunks == 1) throw ParameterError("convergence: max_chunks must be 0 or >= 2");
}

std::string_view to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::converged:
      return "converged";
    case ConvergenceStatus::failed:
      return "failed";
    case ConvergenceStatus::exhausted:
      return "exhausted";
  }
  return "unknown";
}

ConvergenceResult examine_convergence(ObservationStream& stream, const ConvergenceConfig& cfg) {
  validate(cfg);
  const std::size_t d = stream.dim();
  if (d < 1 || d > 2) throw ParameterError("convergence: observations must be 1-D or 2-D");
  const std::size_t m = cfg.chunk_size;

  PointSet data(d, {});
  data.coords.reserve(2 * m * d);
  if (stream.read(2 * m, data.coords) < 2 * m)
    throw DataError("convergence: stream holds fewer than 2 chunks of " + std::to_string(m) + " observations");

  // Grid frozen from the first two chunks.
  const GridSpec grid = make_grid_spec(data, select_bandwidth(data), cfg.nodes_per_axis, cfg.margin);
  const KdeOptions kde_opts{KdeMethod::binned, false, true};

  PointSet first(d, std::vector<double>(data.coords.begin(), data.coords.begin() + static_cast<std::ptrdiff_t>(m * d)));
  const BandwidthMatrix first_h = select_bandwidth(first);
  DensityGrid former = kde_evaluate(first, first_h, grid, kde_opts);

  ConvergenceResult result;
  std::size_t run = 0;
  std::size_t run_start = 0;
  for (std::size_t k = 1;; ++k) {
    const BandwidthMatrix h = cfg.bandwidth_policy == BandwidthPolicy::freeze ? first_h : select_bandwidth(data);
    DensityGrid latter = kde_evaluate(data, h, grid, kde_opts);
    double kl = 0.0;
    try {
      kl = kl_divergence(latter, former);
    } catch (const GridError& e) {
      result.status = ConvergenceStatus::failed;
      result.diagnostic = "step " + std::to_string(k) + ": " + e.what();
      return result;
    }
    result.trace.push_back({k, k * m, kl});
    if (kl < cfg.epsilon) {
      if (run == 0) run_start = k;
      ++run;
    } else {
      run = 0;
    }
    former = std::move(latter);
    const bool at_limit = cfg.max_chunks != 0 && k + 1 >= cfg.max_chunks;
    const std::size_t before = data.coords.size();
    if (at_limit || stream.read(m, data.coords) < m) {
      data.coords.resize(before);
      break;
    }
  }
  // The criterion must hold from Gamma through the end of the data, so only
  // the final run of sub-threshold steps counts.
  if (run >= cfg.window) {
    result.gamma = run_start * m;
    result.status = ConvergenceStatus::converged;
  } else {
    result.status = ConvergenceStatus::exhausted;
    result.diagnostic = "final run of " + std::to_string(run) + " steps below epsilon is shorter than the window of " +
                        std::to_string(cfg.window) + " (" + std::to_string(data.size()) + " observations)";
  }
  return result;
}

void write_trace_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "step,n,kl\n";
  for (const auto& s : result.trace) out << s.step << ',' << s.n << ',' << format_g9(s.kl) << '\n';
}

}  // namespace drivestat
