#include "qsd/sensitivity.hpp"

#include "qsd/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace qsd {

std::string to_string(SensitivityCase c) {
  return c == SensitivityCase::Reflection ? "reflection" : "demographic";
}

double bounded_distance(const State& x, const State& y) { return std::min(1.0, (x - y).norm()); }

namespace {

struct PairedDynamics {
  int noise_vectors = 1;
  std::function<State(const State&, const NoiseIncrement&, const NoiseIncrement&)> step_x;
  std::function<State(const State&, const NoiseIncrement&, const NoiseIncrement&)> step_y;
  const SdeModel* bridge_model = nullptr;  // diffusion used for the bridge test on X
};

FiniteTimeError run_windows(const PairedDynamics& dyn, int dim, bool count_unkilled,
                            const AbsorbingSpec& absorbing,
                            const std::vector<HalfSpace>& reflecting, const GridSpec& domain,
                            const State& x1, double horizon, long n_windows, double dt,
                            RngStream& rng, const WindowOptions& opts) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw ConfigError("horizon and time step must be positive");
  if (n_windows < 1) throw ConfigError("need at least one window");
  if (is_absorbed(absorbing, x1, domain)) throw ConfigError("initial point is absorbed");
  const long steps = std::max(1L, std::lround(horizon / dt));

  TrajectoryHistory history(dim, opts.history_stride);
  FiniteTimeError out;
  double sum = 0.0;
  State x = x1;
  const long total = opts.burn_in_windows + n_windows;
  NoiseIncrement w2{State::Zero(dim)};
  for (long i = 0; i < total; ++i) {
    State xt = x, yt = x;
    bool killed = false;
    for (long n = 0; n < steps; ++n) {
      const NoiseIncrement w = sample_increment(rng, dt, dim);
      if (dyn.noise_vectors > 1) w2 = sample_increment(rng, dt, dim);
      State xn = dyn.step_x(xt, w, w2);
      bool kill = is_absorbed(absorbing, xn, domain);
      if (!kill && dyn.bridge_model) kill = bridge_kill(absorbing, *dyn.bridge_model, xt, xn, dt, rng);
      if (kill) {
        killed = true;
        xt = history.empty() ? x1 : history.draw(rng);
      } else {
        xt = xn;
        history.offer(xt);
      }
      yt = dyn.step_y(yt, w, w2);
      reflect_into(reflecting, yt);
    }
    if (i >= opts.burn_in_windows) {
      if (killed || count_unkilled) sum += bounded_distance(xt, yt);
      if (killed) ++out.kills;
      ++out.windows;
    }
    x = xt;
  }
  out.mean_distance = sum / static_cast<double>(out.windows);
  out.kill_probability = static_cast<double>(out.kills) / static_cast<double>(out.windows);
  return out;
}

SmallMatrix combine_diagonal(const SmallMatrix& a, const SmallMatrix& b) {
  if (!a.isDiagonal() || !b.isDiagonal())
    throw UnsupportedScheme("demographic noise pairs must have diagonal noise");
  SmallMatrix s = SmallMatrix::Zero(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) s(i, i) = std::sqrt(a(i, i) * a(i, i) + b(i, i) * b(i, i));
  return s;
}

}  // namespace

FiniteTimeError finite_time_error_reflection(const SdeModel& model, Scheme scheme,
                                             const AbsorbingSpec& absorbing,
                                             const std::vector<HalfSpace>& reflecting,
                                             const GridSpec& domain, const State& x1,
                                             double horizon, long n_windows, double dt,
                                             RngStream& rng, const WindowOptions& opts) {
  PairedDynamics dyn;
  dyn.step_x = [&](const State& x, const NoiseIncrement& w, const NoiseIncrement&) {
    State y = step(scheme, model, x, dt, w);
    apply_guard(model, y);
    return y;
  };
  dyn.step_y = dyn.step_x;
  dyn.bridge_model = &model;
  return run_windows(dyn, model.dim, false, absorbing, reflecting, domain, x1, horizon, n_windows,
                     dt, rng, opts);
}

SdeModel DemographicPair::killed_model() const {
  SdeModel m;
  m.dim = dim;
  m.drift = drift;
  m.diffusion = [env = environmental, demo = demographic_x](const State& x) {
    return combine_diagonal(env(x), demo(x));
  };
  m.label = label + " (demographic)";
  return m;
}

SdeModel DemographicPair::matched_model() const {
  SdeModel m;
  m.dim = dim;
  m.drift = drift;
  m.diffusion = [env = environmental, demo = demographic_y](const State& x) {
    return combine_diagonal(env(x), demo(x));
  };
  m.label = label + " (matched, no demographic noise)";
  return m;
}

FiniteTimeError finite_time_error_demographic(const DemographicPair& pair,
                                              const AbsorbingSpec& absorbing,
                                              const std::vector<HalfSpace>& reflecting,
                                              const GridSpec& domain, const State& x1,
                                              double horizon, long n_windows, double dt,
                                              RngStream& rng, const WindowOptions& opts) {
  const SdeModel killed = pair.killed_model();
  PairedDynamics dyn;
  dyn.noise_vectors = 2;
  dyn.step_x = [&](const State& x, const NoiseIncrement& w, const NoiseIncrement& w2) {
    const State f = pair.drift(x);
    const SmallMatrix env = pair.environmental(x);
    const SmallMatrix demo = pair.demographic_x(x);
    State out = x + f * dt + env * w.values + demo * w2.values;
    if (!out.allFinite()) throw IntegrationFault("non-finite demographic step", x);
    return out;
  };
  dyn.step_y = [&](const State& y, const NoiseIncrement& w, const NoiseIncrement& w2) {
    const State f = pair.drift(y);
    State out = y + f * dt + pair.environmental(y) * w.values + pair.demographic_y(y) * w2.values;
    if (!out.allFinite()) throw IntegrationFault("non-finite matched step", y);
    return out;
  };
  dyn.bridge_model = &killed;
  return run_windows(dyn, pair.dim, true, absorbing, reflecting, domain, x1, horizon, n_windows,
                     dt, rng, opts);
}

double wasserstein_bound(double finite_error, double gamma, double horizon) {
  if (finite_error < 0.0) throw ConfigError("finite-time error must be non-negative");
  const double alpha = std::exp(-gamma * horizon);
  if (!(alpha < 1.0) || !(gamma > 0.0) || !(horizon > 0.0))
    throw InvalidContraction("contraction factor must be below 1");
  return finite_error / (1.0 - alpha);
}

double tv_distance(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("total variation needs identical grids");
  return 0.5 * (a.values - b.values).cwiseAbs().sum() * a.grid.cell_volume();
}

double grid_w1_1d(const DensityGrid& a, const DensityGrid& b) {
  if (a.grid.dim != 1 || b.grid.dim != 1) throw GridMismatch("grid Wasserstein distance is 1-D only");
  if (!(a.grid == b.grid)) throw GridMismatch("Wasserstein distance needs identical grids");
  const double h = a.grid.h(0);
  double ca = 0.0, cb = 0.0, sum = 0.0;
  for (Eigen::Index i = 0; i < a.values.size(); ++i) {
    ca += a.values(i) * h;
    cb += b.values(i) * h;
    sum += std::min(1.0, std::abs(ca - cb));
  }
  return h * sum;
}

}  // namespace qsd
