#pragma once

// Synthetic naturalistic-driving records: quadrant GPD accelerations with an
// optional longitudinal-lateral coupling and a velocity-dependent intensity
// hump, on a 10 Hz timeline. Records are IID across time.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "drivestat/bivariate.hpp"
#include "drivestat/rng.hpp"

namespace drivestat {

struct SynthConfig {
  BpdmParams base = BpdmParams::reference();
  double coupling = 0.5;        ///< alpha: lateral scale *= 1 + alpha * |ax|
  double hump = 0.6;            ///< beta: all scales *= 1 + beta * exp(-(v - vc)^2 / (2 wv^2))
  double hump_center = 7.5;     ///< vc, m/s
  double hump_width = 3.0;      ///< wv, m/s
  /// Velocity mixture: near-zero half-normal, uniform plateau, linear taper.
  std::array<double, 3> velocity_weights{0.15, 0.55, 0.30};
  double near_zero_scale = 0.5;  ///< m/s
  double plateau_end = 15.0;     ///< m/s
  double taper_end = 35.0;       ///< m/s
  double sample_rate = 10.0;     ///< Hz
  std::uint64_t seed = 1;
};

void validate(const SynthConfig& cfg);

struct TripRecord {
  double t = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double vx = 0.0;
};

/// Stateful generator; records come out in timestamp order.
class SynthGenerator {
 public:
  explicit SynthGenerator(const SynthConfig& cfg);
  TripRecord next();
  /// Intensity multiplier at velocity v.
  [[nodiscard]] double hump_factor(double v) const;

 private:
  double draw_velocity();

  SynthConfig cfg_;
  Rng rng_;
  std::uint64_t index_ = 0;
};

std::vector<TripRecord> synth_generate(const SynthConfig& cfg, std::size_t n);

}  // namespace drivestat
