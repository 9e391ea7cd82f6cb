#pragma once

#include "qsd/rng.hpp"
#include "qsd/types.hpp"

#include <array>
#include <functional>
#include <string>

namespace qsd {

/// Entry k holds the partial derivative of the diffusion matrix with respect to x_k.
using DiffusionGradient = std::array<SmallMatrix, kMaxDim>;

/// dX = f(X) dt + sigma(X) dW in dimension `dim` (at most kMaxDim).
struct SdeModel {
  int dim = 1;
  std::function<State(const State&)> drift;
  std::function<SmallMatrix(const State&)> diffusion;
  // Optional; only the Milstein scheme needs it.
  std::function<DiffusionGradient(const State&)> diffusion_gradient;
  // Optional post-step map that keeps a state inside the model's natural domain
  // (e.g. folding Wright-Fisher overshoot above 1). Integrators never call it.
  std::function<void(State&)> domain_guard;
  std::string label;

  bool has_gradient() const { return static_cast<bool>(diffusion_gradient); }
};

enum class Scheme { EulerMaruyama, Milstein };

struct NoiseIncrement {
  State values;
};

NoiseIncrement sample_increment(RngStream& rng, double dt, int dim);

State em_step(const SdeModel& model, const State& x, double dt, const NoiseIncrement& w);

/// Euler-Maruyama plus the diagonal-noise Milstein correction
/// 1/2 sigma_ii d_i sigma_ii (w_i^2 - dt). Rejects diffusion that is not diagonal
/// or whose diagonal entry depends on another coordinate.
State milstein_step(const SdeModel& model, const State& x, double dt, const NoiseIncrement& w);

State step(Scheme scheme, const SdeModel& model, const State& x, double dt,
           const NoiseIncrement& w);

/// Applies the model's domain guard if it has one.
inline void apply_guard(const SdeModel& model, State& x) {
  if (model.domain_guard) model.domain_guard(x);
}

/// Convenience for one-dimensional states.
inline State make_state(std::initializer_list<double> xs) {
  State s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) s(i++) = v;
  return s;
}

}  // namespace qsd
