#pragma once

#include "qsd/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qsd {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitTailRejected = 3,
  kExitFitRejected = 4,
};

struct RunConfig {
  std::string command;  // qsd, sensitivity, couple, solve
  std::string experiment = "ou";
  std::optional<double> steps;  // total samples, split evenly across streams
  std::optional<double> dt;
  std::uint64_t seed = 1;
  int streams = 1;
  int workers = 1;
  std::string bridge;         // empty: experiment default; off, constant, modified
  std::vector<long> cells;    // grid override, one entry per axis
  std::vector<long> blocks;   // block counts, one entry per axis
  long overlap = 0;
  std::optional<long> shift_passes;
  bool invariant = false;     // qsd: sample the no-kill modification instead
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::string matching = "plus";
  std::optional<double> horizon;
  long windows = 2000;
  long burn_in_windows = 50;
  long coupling_samples = 2000;
  std::optional<double> coupling_dt;
  std::string far = "reflection";
  std::string input;          // solve: reference density CSV
  std::optional<double> lambda;
  std::string output = "out";

  // Throws ConfigError on the first invalid field.
  void validate() const;
  // Stable key=value listing of every field; hashed into output headers.
  std::string canonical() const;
  std::string hash() const;
};

/// Experiment with the config's overrides applied.
NamedExperiment configured_experiment(const RunConfig& cfg);

/// Sample -> estimate lambda -> solve. Writes v.csv, u.csv, lambda.txt,
/// taus.txt, tail_acceptance.csv, solve_report.txt.
int cmd_qsd(const RunConfig& cfg);
/// Coupling times and exponential tail fit. Writes coupling_times.txt,
/// coupling_tail.csv, tail_fit.txt, gamma.txt.
int cmd_couple(const RunConfig& cfg);
/// Coupling, finite-time error and bound. Adds finite_error.txt, bound.txt,
/// sensitivity_report.txt and a row in sensitivity_summary.csv.
int cmd_sensitivity(const RunConfig& cfg);
/// Solver only, on an existing reference density.
int cmd_solve(const RunConfig& cfg);

/// Parses argv (flags or --config file) and dispatches; returns the exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace qsd
