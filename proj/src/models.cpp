#include "qsd/models.hpp"

#include <cmath>

namespace qsd {

namespace {

const double kSqrt2 = std::sqrt(2.0);

SmallMatrix scaled_identity(int dim, double s) {
  return SmallMatrix::Identity(dim, dim) * s;
}

DiffusionGradient zero_gradient(int dim) {
  DiffusionGradient g;
  for (auto& m : g) m = SmallMatrix::Zero(dim, dim);
  return g;
}

SdeModel additive_model(int dim, std::function<State(const State&)> drift, double sigma,
                        std::string label) {
  SdeModel m;
  m.dim = dim;
  m.drift = std::move(drift);
  m.diffusion = [dim, sigma](const State&) { return scaled_identity(dim, sigma); };
  m.diffusion_gradient = [dim](const State&) { return zero_gradient(dim); };
  m.label = std::move(label);
  return m;
}

double positive_override(const std::optional<double>& v, double fallback, const char* what) {
  if (!v) return fallback;
  if (!(*v > 0.0) || !std::isfinite(*v)) throw ConfigError(std::string(what) + " must be positive");
  return *v;
}

NamedExperiment ornstein_uhlenbeck(const ExperimentOverrides& o) {
  const double theta = 1.0, mu = 2.0;
  const double sigma = positive_override(o.sigma, 1.0, "sigma");
  NamedExperiment e;
  e.name = "ou";
  e.model = additive_model(
      1, [=](const State& x) { return State::Constant(1, theta * (mu - x(0))); }, sigma,
      "Ornstein-Uhlenbeck theta=1 mu=2");
  e.absorbing.half_spaces = {{0, Side::Below, 0.0}, {0, Side::Above, 3.0}};
  e.absorbing.bridge.mode = BridgeMode::ConstantSigma;
  e.grid = GridSpec::make({0.0}, {3.0}, {512});
  e.dt = 1e-3;
  e.x0 = make_state({1.5});
  e.published["lambda"] = {0.267176, "Ornstein-Uhlenbeck example, estimated killing rate (magnitude)"};
  return e;
}

NamedExperiment wright_fisher(const ExperimentOverrides&) {
  NamedExperiment e;
  e.name = "wright_fisher";
  SdeModel& m = e.model;
  m.dim = 1;
  m.drift = [](const State& x) { return State::Constant(1, -x(0)); };
  m.diffusion = [](const State& x) {
    return SmallMatrix::Constant(1, 1, std::sqrt(std::max(0.0, x(0) * (1.0 - x(0)))));
  };
  m.diffusion_gradient = [](const State& x) {
    DiffusionGradient g = zero_gradient(1);
    const double s = std::sqrt(std::max(0.0, x(0) * (1.0 - x(0))));
    g[0](0, 0) = s > 0.0 ? (1.0 - 2.0 * x(0)) / (2.0 * s) : 0.0;
    return g;
  };
  // 1 is an entrance boundary; fold numerical overshoot back inside.
  m.domain_guard = [](State& x) {
    if (x(0) > 1.0) x(0) = 2.0 - x(0);
  };
  m.label = "Wright-Fisher dX = -X dt + sqrt(X(1-X)) dW";
  e.absorbing.half_spaces = {{0, Side::Below, 0.0}};
  e.absorbing.bridge.mode = BridgeMode::ModifiedVanishing;
  e.grid = GridSpec::make({0.0}, {1.0}, {128});
  e.scheme = Scheme::Milstein;
  e.dt = 0.01;
  e.x0 = make_state({0.5});
  e.published["lambda"] = {1.0, "derived: the generator maps 2(1-x) to -2(1-x)"};
  return e;
}

NamedExperiment ring(const ExperimentOverrides& o) {
  const double eps = positive_override(o.epsilon, 1.0, "epsilon");
  NamedExperiment e;
  e.name = "ring";
  e.model = additive_model(
      2,
      [](const State& s) {
        const double x = s(0), y = s(1), r = x * x + y * y - 1.0;
        State f(2);
        f << -4.0 * x * r + y, -4.0 * y * r - x;
        return f;
      },
      eps, "ring attractor of radius 1");
  e.absorbing.kill_on_domain_exit = true;
  e.grid = GridSpec::make({-1.5, -1.5}, {1.5, 1.5}, {256, 256});
  e.dt = 1e-3;
  e.x0 = make_state({1.0, 0.0});
  e.published["lambda"] = {0.176302, "ring example, estimated killing rate (magnitude)"};
  e.published["s_min_inv"] = {0.2225, "ring example, inverse smallest singular value"};
  return e;
}

NamedExperiment gradient_flow(const std::string& name, const ExperimentOverrides& o) {
  const double sigma = positive_override(o.sigma, 0.7, "sigma");
  const bool single = name == "single_well";
  NamedExperiment e;
  e.name = name;
  e.model = additive_model(
      1,
      [single](const State& x) {
        const double slope = single ? 2.0 * (x(0) - 1.0) : double_well_slope(x(0));
        return State::Constant(1, -slope);
      },
      sigma, single ? "gradient flow of (x-1)^2" : "gradient flow of the double-well quartic");
  e.absorbing.half_spaces = {{0, Side::Below, 0.0}};
  e.absorbing.bridge.mode = BridgeMode::ConstantSigma;
  e.grid = GridSpec::make({0.0}, {3.0}, {256});
  e.dt = 1e-3;
  e.x0 = make_state({single ? 1.0 : kSqrt2 + 1.0});
  // far ends of the well region; the double-well pair starts in different wells
  e.coupling_start = single ? std::pair{make_state({0.2}), make_state({2.5})}
                            : std::pair{make_state({kSqrt2 - 1.0}), make_state({kSqrt2 + 1.0})};
  e.sensitivity = SensitivityCase::Reflection;
  e.reflecting = {{0, Side::Below, 0.0}};
  if (single) {
    e.horizon = 0.5;
    e.published["gamma"] = {2.031414, "single-well example, coupling tail rate"};
    e.published["finite_error"] = {0.00391083, "single-well example, finite-time error at T=0.5"};
    e.published["bound"] = {0.0061, "single-well example, QSD vs invariant measure bound"};
  } else {
    e.horizon = 20.0;
    e.published["gamma"] = {0.027521, "double-well example, coupling tail rate"};
    e.published["finite_error"] = {0.06402, "double-well example, finite-time error at T=20"};
    e.published["bound"] = {0.1512, "double-well example, QSD vs invariant measure bound"};
    e.published["s_min_inv"] = {0.4988, "double-well example, inverse smallest singular value"};
  }
  return e;
}

NamedExperiment lotka_volterra(const ExperimentOverrides& o) {
  const double l1 = 2.0, l2 = 4.0, a11 = 0.8, a12 = 1.6, a21 = 1.0, a22 = 5.0;
  const double sigma = positive_override(o.sigma, 0.75, "sigma");
  const double eps = positive_override(o.epsilon, 0.05, "epsilon");
  double env = sigma;
  if (o.matching == NoiseMatching::Minus) {
    if (!(sigma > eps)) throw ConfigError("minus noise matching needs sigma > epsilon");
    env = std::sqrt(sigma * sigma - eps * eps);
  }

  DemographicPair pair;
  pair.dim = 2;
  pair.drift = [=](const State& s) {
    State f(2);
    f << s(0) * (l1 - a11 * s(0) - a12 * s(1)), s(1) * (l2 - a21 * s(0) - a22 * s(1));
    return f;
  };
  pair.environmental = [env](const State& s) {
    SmallMatrix m = SmallMatrix::Zero(2, 2);
    m(0, 0) = env * s(0);
    m(1, 1) = env * s(1);
    return m;
  };
  pair.demographic_x = [eps](const State& s) {
    SmallMatrix m = SmallMatrix::Zero(2, 2);
    m(0, 0) = eps * std::sqrt(std::max(0.0, s(0)));
    m(1, 1) = eps * std::sqrt(std::max(0.0, s(1)));
    return m;
  };
  pair.demographic_y = [eps](const State& s) {
    SmallMatrix m = SmallMatrix::Zero(2, 2);
    m(0, 0) = eps * s(0);
    m(1, 1) = eps * s(1);
    return m;
  };
  pair.label = "competitive Lotka-Volterra";

  NamedExperiment e;
  e.name = "lotka_volterra";
  e.model = pair.killed_model();
  e.absorbing.half_spaces = {{0, Side::Below, 0.0}, {1, Side::Below, 0.0}};
  e.absorbing.bridge.mode = BridgeMode::ModifiedVanishing;
  e.grid = GridSpec::make({0.0, 0.0}, {5.0, 2.5}, {160, 80});
  e.dt = 1e-3;
  e.x0 = make_state({1.5, 0.5});
  e.coupling_start = {make_state({1.5, 0.5}), make_state({0.5, 1.5})};
  e.sensitivity = SensitivityCase::Demographic;
  e.demographic = pair;
  e.horizon = sigma > 1.0 ? 12.0 : 4.0;
  e.published["finite_error_sigma075"] = {0.01773, "Lotka-Volterra sigma=0.75, finite-time error at T=4"};
  e.published["bound_sigma075"] = {0.02835, "Lotka-Volterra sigma=0.75, QSD vs invariant measure bound"};
  e.published["kill_prob_sigma11"] = {0.11186, "Lotka-Volterra sigma=1.1, kill probability before T=12"};
  e.published["finite_error_sigma11"] = {0.06230, "Lotka-Volterra sigma=1.1, finite-time error at T=12"};
  e.published["bound_sigma11"] = {0.1356, "Lotka-Volterra sigma=1.1, QSD vs invariant measure bound"};
  return e;
}

NamedExperiment rossler(const ExperimentOverrides& o) {
  const double a = 0.2, b = 0.2, c = 5.7;
  const double eps = positive_override(o.epsilon, 0.1, "epsilon");
  NamedExperiment e;
  e.name = "rossler";
  e.model = additive_model(
      3,
      [=](const State& s) {
        State f(3);
        f << -s(1) - s(2), s(0) + a * s(1), b + s(2) * (s(0) - c);
        return f;
      },
      eps, "stochastic Rossler oscillator");
  e.absorbing.kill_on_domain_exit = true;
  e.grid = GridSpec::make({-15.0, -15.0, -1.5}, {15.0, 15.0, 1.5}, {1024, 1024, 128});
  e.blocks.blocks = {32, 32, 4};
  e.blocks.shift_passes = 3;
  e.dt = 1e-3;
  e.history_stride = 10;
  e.x0 = make_state({-5.0, 0.0, 0.02});
  e.published["lambda"] = {0.473011, "Rossler example, estimated killing rate (magnitude)"};
  return e;
}

}  // namespace

double single_well_potential(double x) { return (x - 1.0) * (x - 1.0); }

double double_well_potential(double x) {
  return x * x * x * x - 4.0 * kSqrt2 * x * x * x + 10.0 * x * x - 4.0 * kSqrt2 * x + 1.0;
}

double double_well_slope(double x) {
  return 4.0 * x * x * x - 12.0 * kSqrt2 * x * x + 20.0 * x - 4.0 * kSqrt2;
}

std::vector<std::string> experiment_names() {
  return {"ou", "wright_fisher", "ring", "single_well", "double_well", "lotka_volterra", "rossler"};
}

namespace {

NamedExperiment build(const std::string& name, const ExperimentOverrides& overrides) {
  if (name == "ou") return ornstein_uhlenbeck(overrides);
  if (name == "wright_fisher") return wright_fisher(overrides);
  if (name == "ring") return ring(overrides);
  if (name == "single_well" || name == "double_well") return gradient_flow(name, overrides);
  if (name == "lotka_volterra") return lotka_volterra(overrides);
  if (name == "rossler") return rossler(overrides);
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace

NamedExperiment get_experiment(const std::string& name, const ExperimentOverrides& overrides) {
  NamedExperiment e = build(name, overrides);
  if (e.coupling_start.first.size() == 0) {
    State y = e.x0;
    y(0) += 0.25 * (e.grid.upper[0] - e.grid.lower[0]);
    e.coupling_start = {e.x0, y};
  }
  return e;
}

}  // namespace qsd
