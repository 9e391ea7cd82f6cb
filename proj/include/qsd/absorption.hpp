#pragma once

#include "qsd/grid.hpp"
#include "qsd/rng.hpp"
#include "qsd/sde.hpp"

#include <vector>

namespace qsd {

enum class Side {
  Below,  // x[axis] <= threshold
  Above,  // x[axis] >= threshold
};

struct HalfSpace {
  int axis = 0;
  Side side = Side::Below;
  double threshold = 0.0;

  bool contains(const State& x) const {
    return side == Side::Below ? x(axis) <= threshold : x(axis) >= threshold;
  }
};

enum class BridgeMode {
  Off,
  // phi^2 = squared diffusion of the axis at the step's start point
  ConstantSigma,
  // phi^2 = min(g(x), g(y)) / 3 for diffusion that vanishes at the boundary
  ModifiedVanishing,
};

struct BridgePolicy {
  BridgeMode mode = BridgeMode::Off;
};

/// Absorbing set as a union of axis-aligned half-spaces, optionally extended by
/// everything outside the numerical domain.
struct AbsorbingSpec {
  std::vector<HalfSpace> half_spaces;
  bool kill_on_domain_exit = false;
  BridgePolicy bridge;

  // Throws ConfigError for non-finite thresholds or, for QSD runs, no killing at all.
  void validate(int dim, bool qsd_run) const;
};

struct KillEvent {
  long step = 0;
  double time = 0.0;
  State location;
  bool via_bridge = false;
};

bool is_absorbed(const AbsorbingSpec& spec, const State& x, const GridSpec& domain);

/// Probability that a Brownian bridge from x to y over time dt with strength
/// phi2 touches the level z. Returns 1 when an endpoint is already across.
double bridge_hit_probability(double x, double y, double z, double dt, double phi2);

/// phi^2 for one axis under the policy; 0 means the bridge check is skipped.
double bridge_strength(BridgeMode mode, const SdeModel& model, int axis, const State& from,
                       const State& to);

/// Tests each absorbing hyperplane independently with the 1-D bridge law and
/// returns true if any Bernoulli draw fires. Both endpoints must be unabsorbed.
bool bridge_kill(const AbsorbingSpec& spec, const SdeModel& model, const State& from,
                 const State& to, double dt, RngStream& rng);

/// Mirrors every coordinate that crossed a half-space boundary back to the
/// allowed side (reflecting-boundary dynamics).
void reflect_into(const std::vector<HalfSpace>& walls, State& x);

}  // namespace qsd
