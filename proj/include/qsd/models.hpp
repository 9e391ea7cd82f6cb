#pragma once

#include "qsd/absorption.hpp"
#include "qsd/grid.hpp"
#include "qsd/least_norm.hpp"
#include "qsd/sde.hpp"
#include "qsd/sensitivity.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qsd {

struct PublishedValue {
  double value = 0.0;
  std::string source;
};

// How the no-kill Lotka-Volterra model absorbs the demographic noise.
enum class NoiseMatching {
  Plus,   // killed model uses sigma; matched model has sqrt(sigma^2 + eps^2)
  Minus,  // killed model uses sqrt(sigma^2 - eps^2); matched model has sigma
};

struct ExperimentOverrides {
  std::optional<double> sigma;    // environmental / additive noise strength
  std::optional<double> epsilon;  // demographic noise (Lotka-Volterra) or ring/Rossler noise
  NoiseMatching matching = NoiseMatching::Plus;
};

struct NamedExperiment {
  std::string name;
  SdeModel model;
  AbsorbingSpec absorbing;
  GridSpec grid;
  Scheme scheme = Scheme::EulerMaruyama;
  double dt = 1e-3;
  State x0;
  long history_stride = 1;
  BlockSpec blocks;
  // Start points of the coupled pair used to estimate the contraction rate.
  std::pair<State, State> coupling_start;

  // Sensitivity setup; empty when the experiment has none.
  std::optional<SensitivityCase> sensitivity;
  std::vector<HalfSpace> reflecting;  // walls of the no-kill modification
  std::optional<DemographicPair> demographic;
  double horizon = 0.0;

  std::map<std::string, PublishedValue> published;
};

std::vector<std::string> experiment_names();

/// Throws ConfigError for an unknown name or an invalid override.
NamedExperiment get_experiment(const std::string& name, const ExperimentOverrides& overrides = {});

// Potentials of the 1-D gradient-flow examples.
double single_well_potential(double x);
double double_well_potential(double x);
double double_well_slope(double x);

}  // namespace qsd
