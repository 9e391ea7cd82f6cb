#include "qsd/models.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace qsd;

namespace {

// Draws 100 points in the box [lo, hi]^dim and compares drift and diffusion with a
// hand-written copy of the model equations.
void compare_model(const SdeModel& m, double lo, double hi,
                   const std::function<State(const State&)>& drift,
                   const std::function<SmallMatrix(const State&)>& diffusion) {
  RngStream rng(42, 0);
  for (int i = 0; i < 100; ++i) {
    State x(m.dim);
    for (int k = 0; k < m.dim; ++k) x(k) = lo + (hi - lo) * rng.uniform();
    CHECK((m.drift(x) - drift(x)).norm() <= 1e-12 * (1.0 + drift(x).norm()));
    CHECK((m.diffusion(x) - diffusion(x)).norm() <= 1e-12 * (1.0 + diffusion(x).norm()));
  }
}

SmallMatrix diag(double a) { return SmallMatrix::Constant(1, 1, a); }

SmallMatrix diag(double a, double b) {
  SmallMatrix m = SmallMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("drifts and diffusions match the model equations") {
  compare_model(get_experiment("ou").model, 0.0, 3.0,
                [](const State& x) { return make_state({1.0 * (2.0 - x(0))}); },
                [](const State&) { return diag(1.0); });

  compare_model(get_experiment("wright_fisher").model, 0.0, 1.0,
                [](const State& x) { return make_state({-x(0)}); },
                [](const State& x) { return diag(std::sqrt(x(0) * (1.0 - x(0)))); });

  compare_model(get_experiment("ring").model, -1.5, 1.5,
                [](const State& s) {
                  const double x = s(0), y = s(1);
                  return make_state({-4.0 * x * (x * x + y * y - 1.0) + y, -4.0 * y * (x * x + y * y - 1.0) - x});
                },
                [](const State&) { return diag(1.0, 1.0); });

  compare_model(get_experiment("single_well").model, 0.0, 3.0,
                [](const State& x) { return make_state({-2.0 * (x(0) - 1.0)}); },
                [](const State&) { return diag(0.7); });

  const double r2 = std::sqrt(2.0);
  compare_model(get_experiment("double_well").model, 0.0, 3.0,
                [r2](const State& s) {
                  const double x = s(0);
                  return make_state({-(4.0 * x * x * x - 12.0 * r2 * x * x + 20.0 * x - 4.0 * r2)});
                },
                [](const State&) { return diag(0.7); });

  const double sig = 0.75, eps = 0.05;
  const auto lv_drift = [](const State& s) {
    const double x = s(0), y = s(1);
    return make_state({x * (2.0 - 0.8 * x - 1.6 * y), y * (4.0 - 1.0 * x - 5.0 * y)});
  };
  const NamedExperiment lv = get_experiment("lotka_volterra");
  compare_model(lv.model, 0.0, 2.5, lv_drift, [=](const State& s) {
    return diag(std::sqrt(sig * sig * s(0) * s(0) + eps * eps * s(0)),
                std::sqrt(sig * sig * s(1) * s(1) + eps * eps * s(1)));
  });
  compare_model(lv.demographic->matched_model(), 0.0, 2.5, lv_drift, [=](const State& s) {
    return diag(std::sqrt(sig * sig + eps * eps) * s(0), std::sqrt(sig * sig + eps * eps) * s(1));
  });
  const NamedExperiment minus = get_experiment("lotka_volterra", {sig, eps, NoiseMatching::Minus});
  compare_model(minus.demographic->matched_model(), 0.0, 2.5, lv_drift,
                [=](const State& s) { return diag(sig * s(0), sig * s(1)); });

  compare_model(get_experiment("rossler").model, -1.5, 1.5,
                [](const State& s) {
                  const double x = s(0), y = s(1), z = s(2);
                  return make_state({-y - z, x + 0.2 * y, 0.2 + z * (x - 5.7)});
                },
                [](const State&) { return SmallMatrix(SmallMatrix::Identity(3, 3) * 0.1); });
}

TEST_CASE("gradient-flow potentials") {
  const double r2 = std::sqrt(2.0);
  CHECK(single_well_potential(1.0) == 0.0);
  CHECK(single_well_potential(0.0) == doctest::Approx(1.0));
  CHECK(double_well_potential(0.0) == doctest::Approx(1.0));
  CHECK(double_well_slope(r2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(double_well_potential(r2) > double_well_potential(r2 - 0.01));
  CHECK(double_well_potential(r2) > double_well_potential(r2 + 0.01));
  for (double m : {r2 - 1.0, r2 + 1.0}) {
    CHECK(double_well_potential(m) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(double_well_slope(m) == doctest::Approx(0.0).epsilon(1e-12));
  }
  for (double x = 0.05; x < 3.0; x += 0.1) {
    const double h = 1e-6;
    CHECK(double_well_slope(x) ==
          doctest::Approx((double_well_potential(x + h) - double_well_potential(x - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("catalogue contents") {
  CHECK(experiment_names().size() == 7);
  for (const std::string& name : experiment_names()) {
    const NamedExperiment e = get_experiment(name);
    CHECK(e.name == name);
    CHECK(e.model.dim == e.grid.dim);
    CHECK(e.x0.size() == e.model.dim);
    CHECK_FALSE(e.published.empty());
    for (const auto& [key, v] : e.published) CHECK_FALSE(v.source.empty());
  }
  CHECK_THROWS_AS(get_experiment("lorenz"), ConfigError);

  const NamedExperiment ou = get_experiment("ou");
  CHECK(ou.published.at("lambda").value == 0.267176);
  CHECK(ou.grid == GridSpec::make({0.0}, {3.0}, {512}));
  CHECK(is_absorbed(ou.absorbing, make_state({0.0}), ou.grid));
  CHECK(is_absorbed(ou.absorbing, make_state({3.0}), ou.grid));
  CHECK_FALSE(is_absorbed(ou.absorbing, make_state({1.5}), ou.grid));

  const NamedExperiment ros = get_experiment("rossler");
  CHECK(ros.grid.lower == std::array<double, kMaxDim>{-15.0, -15.0, -1.5});
  CHECK(ros.grid.upper == std::array<double, kMaxDim>{15.0, 15.0, 1.5});
  CHECK(ros.published.at("lambda").value == 0.473011);

  CHECK(get_experiment("ring").published.at("s_min_inv").value == 0.2225);
  CHECK(get_experiment("double_well").published.at("s_min_inv").value == 0.4988);
  CHECK(get_experiment("single_well").published.at("bound").value == 0.0061);
  CHECK(get_experiment("double_well").published.at("gamma").value == 0.027521);
  const NamedExperiment lv = get_experiment("lotka_volterra");
  CHECK(lv.published.at("bound_sigma075").value == 0.02835);
  CHECK(lv.published.at("bound_sigma11").value == 0.1356);
  CHECK(lv.horizon == 4.0);
  CHECK(get_experiment("lotka_volterra", {1.1, std::nullopt, NoiseMatching::Plus}).horizon == 12.0);
  CHECK_THROWS_AS(get_experiment("lotka_volterra", {0.01, 0.05, NoiseMatching::Minus}), ConfigError);
  CHECK_THROWS_AS(get_experiment("ou", {-1.0, std::nullopt, NoiseMatching::Plus}), ConfigError);
}

TEST_CASE("wright-fisher guard folds overshoot") {
  const NamedExperiment wf = get_experiment("wright_fisher");
  State x = make_state({1.2});
  apply_guard(wf.model, x);
  CHECK(x(0) == doctest::Approx(0.8));
}
