#pragma once

#include "qsd/absorption.hpp"
#include "qsd/grid.hpp"
#include "qsd/rng.hpp"
#include "qsd/sde.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qsd {

enum class SensitivityCase { Reflection, Demographic };

std::string to_string(SensitivityCase c);

struct SensitivityReport {
  SensitivityCase kind = SensitivityCase::Reflection;
  double horizon = 0.0;
  double finite_error = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double bound = 0.0;
  double kill_prob_before_T = 0.0;
  long samples = 0;
};

struct FiniteTimeError {
  double mean_distance = 0.0;
  double kill_probability = 0.0;
  long windows = 0;  // windows averaged (after burn-in)
  long kills = 0;    // windows with at least one kill
};

struct WindowOptions {
  long burn_in_windows = 50;
  long history_stride = 1;
};

/// Rolling-window estimate for the reflecting modification: the killed chain
/// (regenerating from its own history) and the reflected chain share noise from
/// x_i up to T; d_i = min(1, |X_T - Y_T|) if a kill happened, else 0; x_{i+1} = X_T.
FiniteTimeError finite_time_error_reflection(const SdeModel& model, Scheme scheme,
                                             const AbsorbingSpec& absorbing,
                                             const std::vector<HalfSpace>& reflecting,
                                             const GridSpec& domain, const State& x1,
                                             double horizon, long n_windows, double dt,
                                             RngStream& rng, const WindowOptions& opts = {});

/// Killed model with demographic noise and its no-kill counterpart driven by the
/// same two Wiener processes:
///   X: dX = f dt + env(X) dW + demo_x(X) dW'
///   Y: dY = f dt + env(Y) dW + demo_y(Y) dW'
struct DemographicPair {
  int dim = 1;
  std::function<State(const State&)> drift;
  std::function<SmallMatrix(const State&)> environmental;
  std::function<SmallMatrix(const State&)> demographic_x;
  std::function<SmallMatrix(const State&)> demographic_y;
  std::string label;

  // Single-noise models with the same one-step law (diagonal noise only).
  SdeModel killed_model() const;
  SdeModel matched_model() const;
};

/// Rolling-window estimate for the demographic-noise modification:
/// d_i = theta_i (separation at T, no kill) or eta_i (distance at T after
/// regeneration).
FiniteTimeError finite_time_error_demographic(const DemographicPair& pair,
                                              const AbsorbingSpec& absorbing,
                                              const std::vector<HalfSpace>& reflecting,
                                              const GridSpec& domain, const State& x1,
                                              double horizon, long n_windows, double dt,
                                              RngStream& rng, const WindowOptions& opts = {});

/// finite_error / (1 - exp(-gamma T)); throws InvalidContraction when alpha >= 1.
double wasserstein_bound(double finite_error, double gamma, double horizon);

/// d(x, y) = min(1, |x - y|).
double bounded_distance(const State& x, const State& y);

/// (1/2) sum |a - b| * cell volume.
double tv_distance(const DensityGrid& a, const DensityGrid& b);

/// 1-D grid Wasserstein estimate h * sum min(1, |CDF_a - CDF_b|).
double grid_w1_1d(const DensityGrid& a, const DensityGrid& b);

}  // namespace qsd
