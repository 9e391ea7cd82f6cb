#include "qsd/sampler.hpp"

#include "qsd/parallel.hpp"

#include <cmath>
#include <numeric>

namespace qsd {

TrajectoryHistory::TrajectoryHistory(int dim, long stride) : dim_(dim), stride_(stride) {
  if (stride_ < 1) throw ConfigError("history stride must be at least 1");
}

void TrajectoryHistory::offer(const State& x) {
  if (offered_++ % stride_ != 0) return;
  for (int k = 0; k < dim_; ++k) data_.push_back(x(k));
}

State TrajectoryHistory::at(std::size_t i) const {
  State x(dim_);
  for (int k = 0; k < dim_; ++k) x(k) = data_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k)];
  return x;
}

TrajectoryResult run_qsd_trajectory(const SdeModel& model, Scheme scheme,
                                    const AbsorbingSpec& absorbing, const GridSpec& grid,
                                    const State& x0, long n_steps, double dt, RngStream& rng,
                                    long burn_in, const SamplerOptions& options) {
  grid.validate(1);
  absorbing.validate(model.dim, options.qsd_run);
  if (x0.size() != model.dim || grid.dim != model.dim)
    throw ConfigError("initial state, grid and model dimensions differ");
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (n_steps <= burn_in || burn_in < 0) throw ConfigError("n_steps must exceed burn_in");
  if (is_absorbed(absorbing, x0, grid)) throw ConfigError("initial point is absorbed");

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  KillingSample ks;
  ks.total_steps = n_steps;
  ks.burn_in = burn_in;

  TrajectoryHistory history(model.dim, options.history_stride);
  State x = x0;
  long last_regen = 0;

  for (long n = 0; n < n_steps; ++n) {
    const NoiseIncrement w = sample_increment(rng, dt, model.dim);
    State y = step(scheme, model, x, dt, w);
    apply_guard(model, y);
    if (!options.reflecting.empty()) reflect_into(options.reflecting, y);

    bool killed = is_absorbed(absorbing, y, grid);
    bool via_bridge = false;
    if (!killed && bridge_kill(absorbing, model, x, y, dt, rng)) {
      killed = true;
      via_bridge = true;
    }

    if (killed) {
      const double tau = static_cast<double>(n + 1 - last_regen) * dt;
      if (n >= burn_in) ks.taus.push_back(tau);
      const State location = y;
      x = history.empty() ? x0 : history.draw(rng);
      last_regen = n + 1;
      if (options.on_kill)
        options.on_kill(KillEvent{n + 1, static_cast<double>(n + 1) * dt, location, via_bridge}, x);
      continue;
    }

    x = y;
    history.offer(x);
    if (n >= burn_in) {
      if (auto cell = grid.locate(x)) counts(static_cast<Eigen::Index>(*cell)) += 1.0;
    }
  }

  TrajectoryResult out{DensityGrid(grid), counts, std::move(ks)};
  const double total = counts.sum();
  if (total > 0.0) out.density.values = counts / (total * grid.cell_volume());
  return out;
}

TrajectoryResult merge_trajectories(const std::vector<TrajectoryResult>& parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  TrajectoryResult out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (!(parts[i].density.grid == out.density.grid)) throw GridMismatch("merging different grids");
    out.counts += parts[i].counts;
    out.kills.taus.insert(out.kills.taus.end(), parts[i].kills.taus.begin(), parts[i].kills.taus.end());
    out.kills.total_steps += parts[i].kills.total_steps;
    out.kills.burn_in += parts[i].kills.burn_in;
  }
  const double total = out.counts.sum();
  out.density.values = total > 0.0 ? Eigen::VectorXd(out.counts / (total * out.density.grid.cell_volume()))
                                   : Eigen::VectorXd::Zero(out.counts.size());
  return out;
}

TrajectoryResult run_qsd_parallel(const SdeModel& model, Scheme scheme,
                                  const AbsorbingSpec& absorbing, const GridSpec& grid,
                                  const State& x0, long steps_per_stream, double dt,
                                  std::uint64_t seed, int n_streams, int workers,
                                  const SamplerOptions& options) {
  if (n_streams < 1) throw ConfigError("need at least one stream");
  std::vector<TrajectoryResult> parts(static_cast<std::size_t>(n_streams));
  parallel_for(static_cast<std::size_t>(n_streams), workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    parts[i] = run_qsd_trajectory(model, scheme, absorbing, grid, x0, steps_per_stream, dt, rng,
                                  default_burn_in(steps_per_stream), options);
  });
  return merge_trajectories(parts);
}

double estimate_killing_rate(const KillingSample& ks) {
  if (ks.taus.empty()) throw NoKillingObserved("no killing events were recorded");
  const double mean = std::accumulate(ks.taus.begin(), ks.taus.end(), 0.0) /
                      static_cast<double>(ks.taus.size());
  return 1.0 / mean;
}

TailAcceptance tail_acceptance(const KillingSample& ks, double lambda,
                               const std::vector<double>& times) {
  TailAcceptance out;
  out.curve = survival_curve(ks.taus, times);
  out.accepted = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double e = std::exp(-lambda * times[i]);
    out.predicted.push_back(e);
    if (e < out.curve.lower[i] || e > out.curve.upper[i]) out.accepted = false;
  }
  return out;
}

std::vector<double> default_acceptance_times(const KillingSample& ks) {
  if (ks.taus.empty()) throw NoKillingObserved("no killing events were recorded");
  return linspace(quantile(ks.taus, 0.10), quantile(ks.taus, 0.99), 12);
}

}  // namespace qsd
