#pragma once

#include "qsd/absorption.hpp"
#include "qsd/grid.hpp"
#include "qsd/sde.hpp"
#include "qsd/survival.hpp"

#include <functional>
#include <vector>

namespace qsd {

/// Thinned record of visited unabsorbed states used for regeneration.
/// Stores every `stride`-th offered state in a flat buffer.
class TrajectoryHistory {
 public:
  TrajectoryHistory(int dim, long stride = 1);

  void offer(const State& x);
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size() / static_cast<std::size_t>(dim_); }
  State at(std::size_t i) const;
  // Uniform draw over the stored entries.
  State draw(RngStream& rng) const { return at(rng.index(size())); }

 private:
  int dim_;
  long stride_;
  long offered_ = 0;
  std::vector<double> data_;
};

struct KillingSample {
  std::vector<double> taus;
  long total_steps = 0;
  long burn_in = 0;
};

struct TailAcceptance {
  SurvivalCurve curve;
  std::vector<double> predicted;  // exp(-lambda t_i)
  bool accepted = false;
};

struct SamplerOptions {
  long history_stride = 1;
  // Mirror walls for runs without killing (invariant-measure sampling).
  std::vector<HalfSpace> reflecting;
  // Requires at least one killing mechanism in the absorbing spec.
  bool qsd_run = true;
  // Called after each kill with the event and the regenerated state.
  std::function<void(const KillEvent&, const State&)> on_kill;
};

struct TrajectoryResult {
  DensityGrid density;     // normalized to unit mass
  Eigen::VectorXd counts;  // raw per-cell counts
  KillingSample kills;
};

inline long default_burn_in(long n_steps) { return n_steps / 10; }

/// Long regenerating trajectory: on absorption (endpoint or bridge) the
/// killing time since the last regeneration is recorded and the state is
/// resampled uniformly from the stored history. Post-burn-in unabsorbed samples
/// inside the grid are histogrammed.
TrajectoryResult run_qsd_trajectory(const SdeModel& model, Scheme scheme,
                                    const AbsorbingSpec& absorbing, const GridSpec& grid,
                                    const State& x0, long n_steps, double dt, RngStream& rng,
                                    long burn_in, const SamplerOptions& options = {});

/// Independent trajectories on streams (seed, 0..n_streams-1), merged in stream order.
TrajectoryResult run_qsd_parallel(const SdeModel& model, Scheme scheme,
                                  const AbsorbingSpec& absorbing, const GridSpec& grid,
                                  const State& x0, long steps_per_stream, double dt,
                                  std::uint64_t seed, int n_streams, int workers,
                                  const SamplerOptions& options = {});

TrajectoryResult merge_trajectories(const std::vector<TrajectoryResult>& parts);

/// 1 / mean(taus); throws NoKillingObserved on an empty sample.
double estimate_killing_rate(const KillingSample& ks);

/// Accepts lambda when exp(-lambda t_i) lies inside every Agresti-Coull interval.
TailAcceptance tail_acceptance(const KillingSample& ks, double lambda,
                               const std::vector<double>& times);

/// 12 evenly spaced times between the 10th and 99th percentile of the taus.
std::vector<double> default_acceptance_times(const KillingSample& ks);

}  // namespace qsd
