#pragma once

// KL divergence between density grids and the data-sufficiency examination:
// grow the dataset chunk by chunk and report the size from which successive
// density estimates stop changing.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drivestat/kde.hpp"
#include "drivestat/types.hpp"

namespace drivestat {

inline constexpr double kDensityFloor = 1e-12;
inline constexpr double kMassTolerance = 1e-2;

/// Riemann-sum approximation of integral f_new * log(f_new / f_old). Both
/// grids are clamped below at kDensityFloor; results within 1e-10 below zero
/// are reported as 0.
double kl_divergence(const DensityGrid& f_new, const DensityGrid& f_old);

/// Sequential source of d-dimensional observations.
class ObservationStream {
 public:
  virtual ~ObservationStream() = default;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// Appends up to max_rows observations (row-major) to `out`; returns the
  /// number appended. Zero means the stream is exhausted.
  virtual std::size_t read(std::size_t max_rows, std::vector<double>& out) = 0;
};

/// Streams a finite dataset, optionally after a seeded shuffle of its rows.
class PointSetStream final : public ObservationStream {
 public:
  explicit PointSetStream(PointSet data, std::optional<std::uint64_t> shuffle_seed = std::nullopt);
  [[nodiscard]] std::size_t dim() const override { return data_.dim; }
  std::size_t read(std::size_t max_rows, std::vector<double>& out) override;

 private:
  PointSet data_;
  std::size_t cursor_ = 0;
};

enum class BandwidthPolicy { reselect, freeze };

struct ConvergenceConfig {
  std::size_t chunk_size = 10'000;  ///< m
  double epsilon = 1e-4;
  std::size_t window = 20;  ///< consecutive steps that must stay below epsilon
  std::size_t nodes_per_axis = 0;  ///< 0: 512 for 1-D, 128 for 2-D
  double margin = kDefaultGridMargin;
  BandwidthPolicy bandwidth_policy = BandwidthPolicy::reselect;
  std::size_t max_chunks = 0;  ///< stop reading after this many chunks; 0 reads the whole stream
};

void validate(const ConvergenceConfig& cfg);

enum class ConvergenceStatus { converged, failed, exhausted };
std::string_view to_string(ConvergenceStatus s);

struct ConvergenceStep {
  std::size_t step = 0;  ///< k: former dataset holds k chunks
  std::size_t n = 0;     ///< former dataset size
  double kl = 0.0;       ///< D_KL[f_(n+m) || f_n]
};

struct ConvergenceResult {
  std::optional<std::size_t> gamma;
  std::vector<ConvergenceStep> trace;
  ConvergenceStatus status = ConvergenceStatus::exhausted;
  std::string diagnostic;
};

/// Runs the chunked examination over the whole stream. The density grid is
/// fixed from the first 2m observations. Gamma = k*m where step k starts the
/// final unbroken run of divergences below epsilon; the run must span at
/// least `window` steps, otherwise the status is `exhausted`.
ConvergenceResult examine_convergence(ObservationStream& stream, const ConvergenceConfig& cfg);

/// step,n,kl rows with a header.
void write_trace_csv(std::ostream& out, const ConvergenceResult& result);

}  // namespace drivestat
