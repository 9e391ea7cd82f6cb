#pragma once

#include "qsd/absorption.hpp"
#include "qsd/rng.hpp"
#include "qsd/sde.hpp"
#include "qsd/survival.hpp"

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace qsd {

enum class FarScheme { Reflection, Independent };

struct CouplingConfig {
  FarScheme far = FarScheme::Reflection;
  // Switch to maximal coupling when |x - y| <= factor * sqrt(dt) * ||sigma(mid)||_2,
  // unless a fixed threshold is given.
  double threshold_factor = 2.0;
  double fixed_threshold = 0.0;
  double dt = 1e-3;
  long max_steps = 10'000'000;
  // Mirror walls of the modified (non-killed) process.
  std::vector<HalfSpace> reflecting;
};

struct CouplingSample {
  std::vector<double> taus;  // uncensored coupling times
  long censored = 0;
};

struct TailFit {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double log_intercept = std::numeric_limits<double>::quiet_NaN();
  double t_start = std::numeric_limits<double>::quiet_NaN();
  std::size_t i0 = 0;
  double width_at_start = std::numeric_limits<double>::quiet_NaN();
  SurvivalCurve curve;
  bool admissible = false;  // some i0 admits a single exponential inside all intervals
  bool accepted = false;    // admissible and the interval at t_start is narrow enough
};

/// Gaussian law of one Euler-Maruyama step: mean x + f(x) dt, covariance dt sigma sigma^T.
class GaussianStep {
 public:
  GaussianStep(State mean, const SmallMatrix& covariance);
  static GaussianStep euler(const SdeModel& model, const State& x, double dt);

  State sample(RngStream& rng) const;
  double log_density(const State& z) const;
  const State& mean() const { return mean_; }

 private:
  State mean_;
  SmallMatrix chol_;
  double log_norm_ = 0.0;
};

/// Unit vector sigma^{-1}(x - y) / |sigma^{-1}(x - y)| with sigma taken at the midpoint.
State reflection_direction(const SdeModel& model, const State& x, const State& y);

/// x' uses w; y' uses (I - 2 e e^T) w. Throws ConfigError when x == y.
std::pair<State, State> reflection_step(const SdeModel& model, const State& x, const State& y,
                                        double dt, const NoiseIncrement& w);

std::pair<State, State> independent_step(const SdeModel& model, const State& x, const State& y,
                                         double dt, RngStream& rng);

struct MaximalStep {
  State x;
  State y;
  bool coupled = false;
};

/// Acceptance-rejection maximal coupling of two one-step densities.
MaximalStep maximal_coupling_step(const GaussianStep& px, const GaussianStep& py, RngStream& rng,
                                  long max_rejections = 1'000'000);

double switch_threshold(const SdeModel& model, const CouplingConfig& cfg, const State& x,
                        const State& y);

/// Runs n_samples coupled pairs from (x0, y0): far scheme while apart, maximal
/// coupling once within the threshold. Sample i uses stream (seed, i).
CouplingSample estimate_coupling_times(const SdeModel& model, const CouplingConfig& cfg,
                                       const State& x0, const State& y0, long n_samples,
                                       std::uint64_t seed, int workers = 1);

/// 40 evenly spaced times from 0 to the time at which max(1%, 50 samples) remain.
std::vector<double> default_tail_times(const CouplingSample& sample, int count = 40);

/// Smallest i0 for which a weighted log-linear fit of the survival over
/// i >= i0 stays inside every Agresti-Coull interval. Needs >= 100 samples.
TailFit fit_exponential_tail(const CouplingSample& sample, const std::vector<double>& times,
                             double width_cap = 0.05);

/// alpha = exp(-gamma T). Throws FitRejected / InvalidContraction.
double contraction_alpha(const TailFit& fit, double horizon);

}  // namespace qsd
