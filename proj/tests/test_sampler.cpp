#include "qsd/models.hpp"
#include "qsd/sampler.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qsd;

namespace {

// Brownian motion with unit noise, killed outside (0, 1).
NamedExperiment brownian_interval(long cells) {
  NamedExperiment e;
  e.model.dim = 1;
  e.model.drift = [](const State&) { return State::Zero(1); };
  e.model.diffusion = [](const State&) { return SmallMatrix::Identity(1, 1); };
  e.absorbing.half_spaces = {{0, Side::Below, 0.0}, {0, Side::Above, 1.0}};
  e.absorbing.bridge.mode = BridgeMode::ConstantSigma;
  e.grid = GridSpec::make({0.0}, {1.0}, {cells});
  e.x0 = make_state({0.5});
  return e;
}

}  // namespace

TEST_CASE("history thinning") {
  TrajectoryHistory h(2, 3);
  for (int i = 0; i < 10; ++i) h.offer(make_state({double(i), -double(i)}));
  REQUIRE(h.size() == 4);
  CHECK(h.at(1) == make_state({3.0, -3.0}));
  CHECK(h.at(3) == make_state({9.0, -9.0}));
  CHECK_THROWS_AS(TrajectoryHistory(1, 0), ConfigError);
}

TEST_CASE("Dirichlet Brownian motion: rate pi^2/2 and density (pi/2) sin(pi x)") {
  const NamedExperiment e = brownian_interval(20);
  RngStream rng(3, 0);
  const long n = 10'000'000;
  const TrajectoryResult r =
      run_qsd_trajectory(e.model, Scheme::EulerMaruyama, e.absorbing, e.grid, e.x0, n, 1e-4, rng, n / 10);
  const double lambda = estimate_killing_rate(r.kills);
  CHECK(lambda == doctest::Approx(std::numbers::pi * std::numbers::pi / 2).epsilon(0.05));
  CHECK(r.density.mass() == doctest::Approx(1.0));
  double l1 = 0.0;
  for (std::size_t c = 0; c < e.grid.size(); ++c) {
    const double x = e.grid.center(c)(0);
    l1 += std::abs(r.density.values(static_cast<Eigen::Index>(c)) - 0.5 * std::numbers::pi * std::sin(std::numbers::pi * x)) *
          e.grid.h(0);
  }
  CHECK(l1 < 0.05);
}

TEST_CASE("zero-noise OU at its fixed point") {
  NamedExperiment e = get_experiment("ou");
  e.model.diffusion = [](const State&) { return SmallMatrix::Zero(1, 1); };
  e.absorbing.bridge.mode = BridgeMode::Off;
  RngStream rng(1, 0);
  const TrajectoryResult r = run_qsd_trajectory(e.model, Scheme::EulerMaruyama, e.absorbing, e.grid,
                                                make_state({2.0}), 10000, 1e-3, rng, 1000);
  CHECK(r.kills.taus.empty());
  const auto cell = e.grid.locate(make_state({2.0}));
  REQUIRE(cell);
  CHECK(r.counts.sum() == 9000);
  CHECK(r.counts(static_cast<Eigen::Index>(*cell)) == 9000);
}

TEST_CASE("taus count from the last regeneration and skip burn-in") {
  // deterministic drift to the boundary: every path dies after exactly 10 steps
  NamedExperiment e = get_experiment("ou");
  e.model.drift = [](const State&) { return State::Constant(1, -1.0); };
  e.model.diffusion = [](const State&) { return SmallMatrix::Zero(1, 1); };
  e.absorbing.bridge.mode = BridgeMode::Off;
  RngStream rng(1, 0);
  // x0 = 0.0995: after 10 steps of 0.01 it sits at -0.0005
  const TrajectoryResult r = run_qsd_trajectory(e.model, Scheme::EulerMaruyama, e.absorbing, e.grid,
                                                make_state({0.0995}), 1000, 0.01, rng, 100);
  REQUIRE_FALSE(r.kills.taus.empty());
  double total = 0.0;
  for (double t : r.kills.taus) {
    CHECK(t <= 0.1 + 1e-12);
    CHECK(t >= 0.01 - 1e-12);
    total += t;
  }
  // only lifetimes ending after the burn-in are recorded
  CHECK(total <= 9.0 + 0.1 + 1e-9);
}

TEST_CASE("determinism and parallel merge") {
  const NamedExperiment e = get_experiment("ou");
  auto run = [&](int workers) {
    return run_qsd_parallel(e.model, e.scheme, e.absorbing, e.grid, e.x0, 100000, e.dt, 17, 3, workers);
  };
  const TrajectoryResult a = run(1), b = run(1), c = run(3);
  CHECK(a.counts == b.counts);
  CHECK(a.counts == c.counts);
  CHECK(a.kills.taus == c.kills.taus);
  CHECK(a.density.mass() == doctest::Approx(1.0));
}

TEST_CASE("kill callback sees every event") {
  const NamedExperiment e = get_experiment("ou");
  long events = 0;
  SamplerOptions opts;
  opts.on_kill = [&](const KillEvent& ev, const State& regen) {
    ++events;
    CHECK(ev.time > 0.0);
    CHECK_FALSE(is_absorbed(e.absorbing, regen, e.grid));
  };
  RngStream rng(4, 0);
  const TrajectoryResult r = run_qsd_trajectory(e.model, e.scheme, e.absorbing, e.grid, e.x0, 200000,
                                                e.dt, rng, 0, opts);
  CHECK(events == static_cast<long>(r.kills.taus.size()));
}

TEST_CASE("sampler configuration errors") {
  const NamedExperiment e = get_experiment("ou");
  RngStream rng(1, 0);
  CHECK_THROWS_AS(run_qsd_trajectory(e.model, e.scheme, e.absorbing, e.grid, make_state({-1.0}), 100,
                                     e.dt, rng, 10),
                  ConfigError);
  CHECK_THROWS_AS(run_qsd_trajectory(e.model, e.scheme, AbsorbingSpec{}, e.grid, e.x0, 100, e.dt, rng, 10),
                  ConfigError);
  CHECK_THROWS_AS(run_qsd_trajectory(e.model, e.scheme, e.absorbing, e.grid, e.x0, 100, e.dt, rng, 100),
                  ConfigError);
}
