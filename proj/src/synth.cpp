#include "drivestat/synth.hpp"

#include <cmath>

#include "drivestat/error.hpp"

namespace drivestat {

void validate(const SynthConfig& cfg) {
  validate(cfg.base);
  if (!(cfg.coupling >= 0.0) || !(cfg.hump >= 0.0)) throw ParameterError("synth: coupling and hump must be >= 0");
  if (!(cfg.hump_width > 0.0)) throw ParameterError("synth: hump width must be > 0");
  double sum = 0.0;
  for (const double w : cfg.velocity_weights) {
    if (!(w >= 0.0)) throw ParameterError("synth: velocity weights must be >= 0");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw ParameterError("synth: velocity weights must sum to 1");
  if (!(cfg.near_zero_scale > 0.0)) throw ParameterError("synth: near-zero scale must be > 0");
  if (!(cfg.plateau_end > 0.0 && cfg.taper_end > cfg.plateau_end))
    throw ParameterError("synth: velocity cutoffs must satisfy 0 < plateau_end < taper_end");
  if (!(cfg.sample_rate > 0.0)) throw ParameterError("synth: sample rate must be > 0");
}

SynthGenerator::SynthGenerator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { validate(cfg_); }

double SynthGenerator::hump_factor(double v) const {
  const double z = (v - cfg_.hump_center) / cfg_.hump_width;
  return 1.0 + cfg_.hump * std::exp(-0.5 * z * z);
}

double SynthGenerator::draw_velocity() {
  const double u = rng_.uniform();
  const auto& w = cfg_.velocity_weights;
  if (u < w[0]) return std::fabs(rng_.normal()) * cfg_.near_zero_scale;
  if (u < w[0] + w[1] || w[2] == 0.0) return rng_.uniform() * cfg_.plateau_end;
  // density proportional to (taper_end - v) on [plateau_end, taper_end]
  const double span = cfg_.taper_end - cfg_.plateau_end;
  return cfg_.taper_end - span * std::sqrt(1.0 - rng_.uniform());
}

TripRecord SynthGenerator::next() {
  TripRecord r;
  r.t = static_cast<double>(index_++) / cfg_.sample_rate;
  r.vx = draw_velocity();
  const BpdmDraw d = bpdm_draw(rng_, cfg_.base, hump_factor(r.vx), cfg_.coupling);
  r.ax = d.ax;
  r.ay = d.ay;
  return r;
}

std::vector<TripRecord> synth_generate(const SynthConfig& cfg, std::size_t n) {
  if (n == 0) throw ParameterError("synth_generate: n must be >= 1");
  SynthGenerator gen(cfg);
  std::vector<TripRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(gen.next());
  return out;
}

}  // namespace drivestat
