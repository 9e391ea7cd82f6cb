#include "qsd/models.hpp"
#include "qsd/sensitivity.hpp"

#include <doctest.h>

#include <cmath>

using namespace qsd;

namespace {

DensityGrid point_mass(const GridSpec& g, long cell) {
  DensityGrid d(g);
  d.values(cell) = 1.0 / g.cell_volume();
  return d;
}

}  // namespace

TEST_CASE("bound arithmetic") {
  CHECK(wasserstein_bound(0.00391083, 2.031414, 0.5) == doctest::Approx(0.0061).epsilon(0.01));
  CHECK(wasserstein_bound(0.06402, 0.027521, 20.0) == doctest::Approx(0.1512).epsilon(0.01));
  CHECK(wasserstein_bound(0.0, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(wasserstein_bound(0.1, 0.0, 1.0), InvalidContraction);
  CHECK_THROWS_AS(wasserstein_bound(0.1, 1.0, 0.0), InvalidContraction);
  CHECK_THROWS_AS(wasserstein_bound(-0.1, 1.0, 1.0), ConfigError);
}

TEST_CASE("distances between densities") {
  const GridSpec g = GridSpec::make({0.0}, {1.0}, {10});
  DensityGrid a(g);
  a.values.setOnes();
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(grid_w1_1d(a, a) == 0.0);
  CHECK(tv_distance(point_mass(g, 2), point_mass(g, 7)) == doctest::Approx(1.0));
  CHECK(grid_w1_1d(point_mass(g, 3), point_mass(g, 4)) == doctest::Approx(0.1));
  CHECK(grid_w1_1d(point_mass(g, 0), point_mass(g, 9)) == doctest::Approx(0.9));
  CHECK(bounded_distance(make_state({0.0}), make_state({0.3})) == doctest::Approx(0.3));
  CHECK(bounded_distance(make_state({0.0}), make_state({3.0})) == 1.0);

  const DensityGrid other(GridSpec::make({0.0}, {1.0}, {20}));
  CHECK_THROWS_AS(tv_distance(a, other), GridMismatch);
  CHECK_THROWS_AS(grid_w1_1d(a, other), GridMismatch);
  const DensityGrid flat(GridSpec::make({0.0, 0.0}, {1.0, 1.0}, {4, 4}));
  CHECK_THROWS_AS(grid_w1_1d(flat, flat), GridMismatch);
}

TEST_CASE("no kills means no finite-time error") {
  const NamedExperiment e = get_experiment("single_well");
  AbsorbingSpec unreachable;
  unreachable.half_spaces.push_back({0, Side::Below, -100.0});
  RngStream rng(1, 0);
  const FiniteTimeError fe = finite_time_error_reflection(e.model, e.scheme, unreachable, e.reflecting,
                                                          e.grid, e.x0, 0.5, 200, 1e-2, rng);
  CHECK(fe.mean_distance == 0.0);
  CHECK(fe.kills == 0);
  CHECK(fe.windows == 200);  // burn-in windows come on top
}

TEST_CASE("matched demographic noise gives zero error without absorption") {
  const NamedExperiment lv = get_experiment("lotka_volterra");
  REQUIRE(lv.demographic);
  DemographicPair pair = *lv.demographic;
  pair.demographic_x = [](const State&) { return SmallMatrix::Zero(2, 2); };
  pair.demographic_y = pair.demographic_x;
  AbsorbingSpec none;
  none.half_spaces.push_back({0, Side::Below, -100.0});
  RngStream rng(2, 0);
  const FiniteTimeError fe = finite_time_error_demographic(pair, none, {}, lv.grid, lv.x0,
                                                           1.0, 100, 1e-2, rng);
  CHECK(fe.mean_distance == 0.0);
}

TEST_CASE("reflection error is bounded by the kill probability") {
  const NamedExperiment e = get_experiment("single_well");
  RngStream rng(3, 0);
  const FiniteTimeError fe = finite_time_error_reflection(e.model, e.scheme, e.absorbing, e.reflecting,
                                                          e.grid, e.x0, e.horizon, 3000, 1e-3, rng);
  CHECK(fe.kills > 0);
  CHECK(fe.mean_distance > 0.0);
  CHECK(fe.mean_distance <= fe.kill_probability);
  CHECK(fe.kill_probability == doctest::Approx(static_cast<double>(fe.kills) / fe.windows));
}

TEST_CASE("finite-time error is reproducible and grows with demographic noise") {
  auto run = [](double eps, std::uint64_t seed) {
    const NamedExperiment lv = get_experiment("lotka_volterra", {0.75, eps, NoiseMatching::Plus});
    RngStream rng(seed, 0);
    return finite_time_error_demographic(*lv.demographic, lv.absorbing, lv.reflecting, lv.grid, lv.x0,
                                         lv.horizon, 400, 1e-2, rng)
        .mean_distance;
  };
  CHECK(run(0.05, 4) == run(0.05, 4));
  CHECK(run(0.02, 4) < run(0.2, 4));
}

TEST_CASE("sensitivity configuration errors") {
  const NamedExperiment e = get_experiment("single_well");
  RngStream rng(5, 0);
  CHECK_THROWS_AS(finite_time_error_reflection(e.model, e.scheme, e.absorbing, e.reflecting, e.grid, e.x0,
                                               0.0, 100, 1e-3, rng),
                  ConfigError);
  CHECK_THROWS_AS(finite_time_error_reflection(e.model, e.scheme, e.absorbing, e.reflecting, e.grid, e.x0,
                                               0.5, 0, 1e-3, rng),
                  ConfigError);
  CHECK(to_string(SensitivityCase::Demographic) != to_string(SensitivityCase::Reflection));
}
