#include "qsd/absorption.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

void AbsorbingSpec::validate(int dim, bool qsd_run) const {
  for (const auto& hs : half_spaces) {
    if (!std::isfinite(hs.threshold)) throw ConfigError("absorbing threshold must be finite");
    if (hs.axis < 0 || hs.axis >= dim) throw ConfigError("absorbing half-space axis out of range");
  }
  if (qsd_run && half_spaces.empty() && !kill_on_domain_exit)
    throw ConfigError("a QSD run needs at least one killing mechanism");
}

bool is_absorbed(const AbsorbingSpec& spec, const State& x, const GridSpec& domain) {
  for (const auto& hs : spec.half_spaces)
    if (hs.contains(x)) return true;
  return spec.kill_on_domain_exit && !domain.contains(x);
}

double bridge_hit_probability(double x, double y, double z, double dt, double phi2) {
  if (!(phi2 > 0.0)) throw InvalidStrength("Brownian bridge strength must be positive");
  const double gap = (z - x) * (z - y);
  if (gap <= 0.0) return 1.0;
  return std::exp(-2.0 * gap / (dt * phi2));
}

namespace {

double axis_variance(const SdeModel& model, int axis, const State& at) {
  const SmallMatrix s = model.diffusion(at);
  return s.row(axis).squaredNorm();
}

}  // namespace

double bridge_strength(BridgeMode mode, const SdeModel& model, int axis, const State& from,
                       const State& to) {
  switch (mode) {
    case BridgeMode::Off:
      return 0.0;
    case BridgeMode::ConstantSigma:
      return axis_variance(model, axis, from);
    case BridgeMode::ModifiedVanishing:
      return std::min(axis_variance(model, axis, from), axis_variance(model, axis, to)) / 3.0;
  }
  return 0.0;
}

bool bridge_kill(const AbsorbingSpec& spec, const SdeModel& model, const State& from,
                 const State& to, double dt, RngStream& rng) {
  if (spec.bridge.mode == BridgeMode::Off) return false;
  bool killed = false;
  for (const auto& hs : spec.half_spaces) {
    const double phi2 = bridge_strength(spec.bridge.mode, model, hs.axis, from, to);
    if (!(phi2 > 0.0)) continue;
    const double p = bridge_hit_probability(from(hs.axis), to(hs.axis), hs.threshold, dt, phi2);
    // every active plane draws, so the stream advances the same way regardless of earlier hits
    if (p > 0.0 && rng.bernoulli(p)) killed = true;
  }
  return killed;
}

void reflect_into(const std::vector<HalfSpace>& walls, State& x) {
  for (const auto& hs : walls) {
    if (hs.side == Side::Below && x(hs.axis) < hs.threshold)
      x(hs.axis) = 2.0 * hs.threshold - x(hs.axis);
    else if (hs.side == Side::Above && x(hs.axis) > hs.threshold)
      x(hs.axis) = 2.0 * hs.threshold - x(hs.axis);
  }
}

}  // namespace qsd
