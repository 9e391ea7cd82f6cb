#include "qsd/coupling.hpp"

#include "qsd/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace qsd {

GaussianStep::GaussianStep(State mean, const SmallMatrix& covariance) : mean_(std::move(mean)) {
  Eigen::LLT<SmallMatrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw ConfigError("one-step covariance is not positive definite");
  chol_ = llt.matrixL();
  const auto d = static_cast<double>(mean_.size());
  log_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < chol_.rows(); ++i) log_norm_ -= std::log(chol_(i, i));
}

GaussianStep GaussianStep::euler(const SdeModel& model, const State& x, double dt) {
  const SmallMatrix s = model.diffusion(x);
  return GaussianStep(State(x + model.drift(x) * dt), SmallMatrix(dt * s * s.transpose()));
}

State GaussianStep::sample(RngStream& rng) const {
  State xi(mean_.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
  return mean_ + chol_ * xi;
}

double GaussianStep::log_density(const State& z) const {
  const State r = chol_.triangularView<Eigen::Lower>().solve(State(z - mean_));
  return log_norm_ - 0.5 * r.squaredNorm();
}

State reflection_direction(const SdeModel& model, const State& x, const State& y) {
  const State diff = x - y;
  if (diff.squaredNorm() == 0.0) throw ConfigError("reflection coupling needs distinct states");
  const SmallMatrix s = model.diffusion(State(0.5 * (x + y)));
  State e = s.fullPivLu().solve(diff);
  const double n = e.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("diffusion is not invertible for reflection");
  return e / n;
}

std::pair<State, State> reflection_step(const SdeModel& model, const State& x, const State& y,
                                        double dt, const NoiseIncrement& w) {
  const State e = reflection_direction(model, x, y);
  const NoiseIncrement wr{State(w.values - 2.0 * e * e.dot(w.values))};
  return {em_step(model, x, dt, w), em_step(model, y, dt, wr)};
}

std::pair<State, State> independent_step(const SdeModel& model, const State& x, const State& y,
                                         double dt, RngStream& rng) {
  const NoiseIncrement wx = sample_increment(rng, dt, model.dim);
  const NoiseIncrement wy = sample_increment(rng, dt, model.dim);
  return {em_step(model, x, dt, wx), em_step(model, y, dt, wy)};
}

MaximalStep maximal_coupling_step(const GaussianStep& px, const GaussianStep& py, RngStream& rng,
                                  long max_rejections) {
  MaximalStep out;
  out.x = px.sample(rng);
  if (std::log(rng.uniform()) + px.log_density(out.x) < py.log_density(out.x)) {
    out.y = out.x;
    out.coupled = true;
    return out;
  }
  for (long k = 0; k < max_rejections; ++k) {
    out.y = py.sample(rng);
    if (std::log(rng.uniform()) + py.log_density(out.y) >= px.log_density(out.y)) return out;
  }
  throw LoopOverflow("maximal coupling rejection loop exceeded its cap");
}

double switch_threshold(const SdeModel& model, const CouplingConfig& cfg, const State& x,
                        const State& y) {
  if (cfg.fixed_threshold > 0.0) return cfg.fixed_threshold;
  const SmallMatrix s = model.diffusion(State(0.5 * (x + y)));
  double norm = 0.0;
  if (s.isDiagonal()) {
    norm = s.diagonal().cwiseAbs().maxCoeff();
  } else {
    Eigen::JacobiSVD<SmallMatrix> svd(s);
    norm = svd.singularValues()(0);
  }
  return cfg.threshold_factor * std::sqrt(cfg.dt) * norm;
}

namespace {

// Coupling time of one pair, or a negative value when censored.
double couple_once(const SdeModel& model, const CouplingConfig& cfg, State x, State y,
                   RngStream& rng) {
  if (x == y) return 0.0;
  for (long n = 0; n < cfg.max_steps; ++n) {
    if ((x - y).norm() > switch_threshold(model, cfg, x, y)) {
      if (cfg.far == FarScheme::Reflection) {
        const NoiseIncrement w = sample_increment(rng, cfg.dt, model.dim);
        std::tie(x, y) = reflection_step(model, x, y, cfg.dt, w);
      } else {
        std::tie(x, y) = independent_step(model, x, y, cfg.dt, rng);
      }
      reflect_into(cfg.reflecting, x);
      reflect_into(cfg.reflecting, y);
      continue;
    }
    const MaximalStep m = maximal_coupling_step(GaussianStep::euler(model, x, cfg.dt),
                                                GaussianStep::euler(model, y, cfg.dt), rng);
    x = m.x;
    y = m.y;
    reflect_into(cfg.reflecting, x);
    reflect_into(cfg.reflecting, y);
    if (m.coupled) return static_cast<double>(n + 1) * cfg.dt;
  }
  return -1.0;
}

}  // namespace

CouplingSample estimate_coupling_times(const SdeModel& model, const CouplingConfig& cfg,
                                       const State& x0, const State& y0, long n_samples,
                                       std::uint64_t seed, int workers) {
  if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
  if (n_samples < 1) throw ConfigError("need at least one coupling sample");
  std::vector<double> times(static_cast<std::size_t>(n_samples));
  parallel_for(times.size(), workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    times[i] = couple_once(model, cfg, x0, y0, rng);
  });
  CouplingSample out;
  for (double t : times) {
    if (t < 0.0)
      ++out.censored;
    else
      out.taus.push_back(t);
  }
  return out;
}

std::vector<double> default_tail_times(const CouplingSample& sample, int count) {
  if (sample.taus.empty()) throw FitRejected("no uncensored coupling times");
  const auto m = static_cast<double>(sample.taus.size());
  const double keep = std::max(0.01, 50.0 / m);
  return linspace(0.0, quantile(sample.taus, 1.0 - keep), count);
}

TailFit fit_exponential_tail(const CouplingSample& sample, const std::vector<double>& times,
                             double width_cap) {
  TailFit fit;
  if (sample.taus.size() < 100 || times.size() < 3) return fit;
  fit.curve = survival_curve(sample.taus, times);
  const SurvivalCurve& c = fit.curve;
  const std::size_t n = times.size();

  for (std::size_t i0 = 0; i0 + 3 <= n; ++i0) {
    // weighted least squares of log p on t, weights = survivor counts
    double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t used = 0;
    for (std::size_t i = i0; i < n; ++i) {
      if (c.survivors[i] <= 0) continue;
      const double w = static_cast<double>(c.survivors[i]);
      const double y = std::log(c.p[i]);
      sw += w;
      st += w * times[i];
      sy += w * y;
      stt += w * times[i] * times[i];
      sty += w * times[i] * y;
      ++used;
    }
    if (used < 3) break;
    const double denom = sw * stt - st * st;
    if (!(denom > 0.0)) continue;
    const double slope = (sw * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / sw;
    bool inside = slope < 0.0;
    for (std::size_t i = i0; i < n && inside; ++i) {
      const double model = std::exp(intercept + slope * times[i]);
      inside = model >= c.lower[i] && model <= c.upper[i];
    }
    if (!inside) continue;
    fit.gamma = -slope;
    fit.log_intercept = intercept;
    fit.i0 = i0;
    fit.t_start = times[i0];
    fit.width_at_start = c.upper[i0] - c.lower[i0];
    fit.admissible = true;
    fit.accepted = fit.width_at_start < width_cap;
    return fit;
  }
  return fit;
}

double contraction_alpha(const TailFit& fit, double horizon) {
  if (!fit.accepted) throw FitRejected("exponential tail fit was not accepted");
  if (!(fit.gamma > 0.0)) throw InvalidContraction("contraction rate must be positive");
  if (!(horizon > 0.0)) throw InvalidContraction("horizon must be positive");
  return std::exp(-fit.gamma * horizon);
}

}  // namespace qsd
