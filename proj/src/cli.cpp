#include "qsd/cli.hpp"

#include "qsd/coupling.hpp"
#include "qsd/io.hpp"
#include "qsd/least_norm.hpp"
#include "qsd/parallel.hpp"
#include "qsd/sampler.hpp"
#include "qsd/sensitivity.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace qsd {

namespace fs = std::filesystem;

namespace {

// Stream id of the finite-time-error run; coupling samples use ids 0..n-1.
constexpr std::uint64_t kFiniteErrorStream = 1ULL << 40;

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::string join(const std::vector<long>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "x" : "") + std::to_string(xs[i]);
  return s;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "default"; }

long block_product(const BlockSpec& spec, int dim) {
  long p = 1;
  for (int a = 0; a < dim; ++a) p *= spec.blocks[a];
  return p;
}

// Solver stage shared by qsd and solve.
SolveResult solve_reference(const NamedExperiment& e, double lambda, const DensityGrid& v,
                            int workers) {
  if (block_product(e.blocks, e.grid.dim) == 1) {
    const DiscretizedOperator op = assemble_operator(e.model, e.grid);
    return least_norm_solve(constraint_matrix(op, lambda), v);
  }
  SolveResult r = block_solve(e.model, e.grid, lambda, v, e.blocks, workers);
  if (e.blocks.shift_passes > 0) r.u = shift_blocks(e.model, e.grid, lambda, r.u, e.blocks, workers);
  return r;
}

KeyValues report_values(const SolveReport& r) {
  KeyValues kv{{"residual_norm", format_double(r.residual_norm)},
               {"correction_norm", format_double(r.correction_norm)},
               {"clipped_mass", format_double(r.clipped_mass)},
               {"blocks", std::to_string(r.blocks)}};
  if (r.s_min) kv.emplace_back("s_min", format_double(*r.s_min));
  return kv;
}

void write_scalar(const fs::path& path, double v, const std::string& hash) {
  write_values(path, {v}, hash);
}

struct CouplingOutcome {
  CouplingSample sample;
  TailFit fit;
};

SdeModel contraction_model(const NamedExperiment& e) {
  return e.demographic ? e.demographic->matched_model() : e.model;
}

CouplingOutcome run_coupling(const RunConfig& cfg, const NamedExperiment& e) {
  CouplingConfig cc;
  cc.far = cfg.far == "independent" ? FarScheme::Independent : FarScheme::Reflection;
  cc.dt = cfg.coupling_dt.value_or(e.dt);
  cc.reflecting = e.reflecting;
  CouplingOutcome out;
  out.sample = estimate_coupling_times(contraction_model(e), cc, e.coupling_start.first,
                                       e.coupling_start.second, cfg.coupling_samples, cfg.seed,
                                       cfg.workers);
  if (out.sample.taus.empty()) throw FitRejected("no pair coupled within the step cap");
  out.fit = fit_exponential_tail(out.sample, default_tail_times(out.sample));
  return out;
}

void write_coupling(const fs::path& dir, const CouplingOutcome& c, const std::string& hash) {
  write_values(dir / "coupling_times.txt", c.sample.taus, hash);
  std::vector<double> fitted;
  if (c.fit.admissible)
    for (double t : c.fit.curve.times) fitted.push_back(std::exp(c.fit.log_intercept - c.fit.gamma * t));
  write_survival_csv(dir / "coupling_tail.csv", c.fit.curve, fitted, "fitted", hash);
  write_key_values(dir / "tail_fit.txt",
                   {{"gamma", format_double(c.fit.gamma)},
                    {"log_intercept", format_double(c.fit.log_intercept)},
                    {"t_start", format_double(c.fit.t_start)},
                    {"i0", std::to_string(c.fit.i0)},
                    {"width_at_start", format_double(c.fit.width_at_start)},
                    {"admissible", c.fit.admissible ? "true" : "false"},
                    {"accepted", c.fit.accepted ? "true" : "false"},
                    {"samples", std::to_string(c.sample.taus.size())},
                    {"censored", std::to_string(c.sample.censored)}},
                   hash);
}

}  // namespace

void RunConfig::validate() const {
  static const std::vector<std::string> commands{"qsd", "sensitivity", "couple", "solve"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw ConfigError("unknown command '" + command + "'");
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw ConfigError("unknown experiment '" + experiment + "'");
  if (steps && (!is_integral(*steps) || *steps < 2)) throw ConfigError("steps must be an integer >= 2");
  if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
  if (streams < 1) throw ConfigError("streams must be at least 1");
  if (steps && *steps / streams < 2) throw ConfigError("too few steps per stream");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!bridge.empty() && bridge != "off" && bridge != "constant" && bridge != "modified")
    throw ConfigError("bridge must be off, constant or modified");
  for (long c : cells)
    if (c < 4) throw ConfigError("every axis needs at least 4 cells");
  for (long b : blocks)
    if (b < 1) throw ConfigError("block counts must be positive");
  if (overlap < 0) throw ConfigError("overlap must be non-negative");
  if (shift_passes && *shift_passes < 0) throw ConfigError("shift passes must be non-negative");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (epsilon && !(*epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (matching != "plus" && matching != "minus") throw ConfigError("matching must be plus or minus");
  if (horizon && !(*horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (windows < 1) throw ConfigError("windows must be at least 1");
  if (burn_in_windows < 0) throw ConfigError("burn-in windows must be non-negative");
  if (coupling_samples < 100) throw ConfigError("the tail fit needs at least 100 coupling samples");
  if (coupling_dt && !(*coupling_dt > 0.0)) throw ConfigError("coupling dt must be positive");
  if (far != "reflection" && far != "independent") throw ConfigError("far must be reflection or independent");
  if (lambda && !std::isfinite(*lambda)) throw ConfigError("lambda must be finite");
  if (command == "solve" && input.empty()) throw ConfigError("solve needs --input");
  if (output.empty()) throw ConfigError("output directory must be named");
  if (command == "sensitivity" || command == "couple") {
    const NamedExperiment e = configured_experiment(*this);
    if (!e.sensitivity) throw ConfigError("experiment '" + experiment + "' has no sensitivity setup");
  }
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "command=" << command << "\nexperiment=" << experiment << "\nsteps=" << opt(steps)
    << "\ndt=" << opt(dt) << "\nseed=" << seed << "\nstreams=" << streams
    << "\nbridge=" << (bridge.empty() ? "default" : bridge) << "\ncells=" << join(cells)
    << "\nblocks=" << join(blocks) << "\noverlap=" << overlap
    << "\nshift_passes=" << (shift_passes ? std::to_string(*shift_passes) : "default")
    << "\ninvariant=" << invariant << "\nsigma=" << opt(sigma) << "\nepsilon=" << opt(epsilon)
    << "\nmatching=" << matching << "\nhorizon=" << opt(horizon) << "\nwindows=" << windows
    << "\nburn_in_windows=" << burn_in_windows << "\ncoupling_samples=" << coupling_samples
    << "\ncoupling_dt=" << opt(coupling_dt) << "\nfar=" << far << "\ninput=" << input
    << "\nlambda=" << opt(lambda) << '\n';
  // workers and output location do not change results
  return s.str();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

NamedExperiment configured_experiment(const RunConfig& cfg) {
  ExperimentOverrides o;
  o.sigma = cfg.sigma;
  o.epsilon = cfg.epsilon;
  o.matching = cfg.matching == "minus" ? NoiseMatching::Minus : NoiseMatching::Plus;
  NamedExperiment e = get_experiment(cfg.experiment, o);
  if (cfg.dt) e.dt = *cfg.dt;
  if (cfg.bridge == "off") e.absorbing.bridge.mode = BridgeMode::Off;
  if (cfg.bridge == "constant") e.absorbing.bridge.mode = BridgeMode::ConstantSigma;
  if (cfg.bridge == "modified") e.absorbing.bridge.mode = BridgeMode::ModifiedVanishing;
  if (!cfg.cells.empty()) {
    if (static_cast<int>(cfg.cells.size()) != e.grid.dim) throw ConfigError("cells needs one entry per axis");
    for (int a = 0; a < e.grid.dim; ++a) e.grid.cells[a] = cfg.cells[static_cast<std::size_t>(a)];
  }
  if (!cfg.blocks.empty()) {
    if (static_cast<int>(cfg.blocks.size()) != e.grid.dim) throw ConfigError("blocks needs one entry per axis");
    for (int a = 0; a < e.grid.dim; ++a) e.blocks.blocks[a] = cfg.blocks[static_cast<std::size_t>(a)];
  }
  for (int a = e.grid.dim; a < kMaxDim; ++a) e.blocks.blocks[a] = 1;
  e.blocks.overlap = cfg.overlap;
  if (cfg.shift_passes) e.blocks.shift_passes = *cfg.shift_passes;
  if (cfg.horizon) e.horizon = *cfg.horizon;
  e.grid.validate();
  return e;
}

int cmd_qsd(const RunConfig& cfg) {
  const NamedExperiment e = configured_experiment(cfg);
  const fs::path dir(cfg.output);
  const std::string hash = cfg.hash();
  const long steps = static_cast<long>(cfg.steps.value_or(1e6));

  SdeModel model = e.model;
  AbsorbingSpec absorbing = e.absorbing;
  SamplerOptions opts;
  opts.history_stride = e.history_stride;
  if (cfg.invariant) {
    if (!e.sensitivity) throw ConfigError("experiment '" + e.name + "' has no no-kill modification");
    if (e.demographic) model = e.demographic->matched_model();
    absorbing = AbsorbingSpec{};
    opts.reflecting = e.reflecting;
    opts.qsd_run = false;
  }
  const TrajectoryResult run = run_qsd_parallel(model, e.scheme, absorbing, e.grid, e.x0,
                                                steps / cfg.streams, e.dt, cfg.seed, cfg.streams,
                                                cfg.workers, opts);
  write_density_csv(dir / "v.csv", run.density, hash);

  double lambda = 0.0;
  bool accepted = true;
  if (!cfg.invariant) {
    lambda = estimate_killing_rate(run.kills);
    const TailAcceptance acc = tail_acceptance(run.kills, lambda, default_acceptance_times(run.kills));
    accepted = acc.accepted;
    write_values(dir / "taus.txt", run.kills.taus, hash);
    write_survival_csv(dir / "tail_acceptance.csv", acc.curve, acc.predicted, "predicted", hash);
  }
  write_scalar(dir / "lambda.txt", lambda, hash);

  const SolveResult sol = solve_reference(e, lambda, run.density, cfg.workers);
  write_density_csv(dir / "u.csv", sol.u, hash);
  write_key_values(dir / "solve_report.txt", report_values(sol.report), hash);

  std::cout << "lambda=" << format_double(lambda) << " kills=" << run.kills.taus.size() << '\n';
  if (!accepted) {
    std::cerr << "exponential tail rejected: run the sampler for longer\n";
    return kExitTailRejected;
  }
  return kExitOk;
}

int cmd_couple(const RunConfig& cfg) {
  const NamedExperiment e = configured_experiment(cfg);
  const fs::path dir(cfg.output);
  const std::string hash = cfg.hash();
  const CouplingOutcome c = run_coupling(cfg, e);
  write_coupling(dir, c, hash);
  if (!c.fit.accepted) {
    std::cerr << "coupling tail fit rejected: collect more coupling samples\n";
    return kExitFitRejected;
  }
  write_scalar(dir / "gamma.txt", c.fit.gamma, hash);
  std::cout << "gamma=" << format_double(c.fit.gamma) << '\n';
  return kExitOk;
}

int cmd_sensitivity(const RunConfig& cfg) {
  const NamedExperiment e = configured_experiment(cfg);
  const fs::path dir(cfg.output);
  const std::string hash = cfg.hash();
  const CouplingOutcome c = run_coupling(cfg, e);
  write_coupling(dir, c, hash);
  if (!c.fit.accepted) {
    std::cerr << "coupling tail fit rejected: collect more coupling samples\n";
    return kExitFitRejected;
  }
  write_scalar(dir / "gamma.txt", c.fit.gamma, hash);

  SensitivityReport rep;
  rep.kind = *e.sensitivity;
  rep.horizon = e.horizon;
  rep.gamma = c.fit.gamma;
  rep.alpha = contraction_alpha(c.fit, e.horizon);

  RngStream rng(cfg.seed, kFiniteErrorStream);
  WindowOptions wo;
  wo.burn_in_windows = cfg.burn_in_windows;
  wo.history_stride = e.history_stride;
  const FiniteTimeError fe =
      e.demographic ? finite_time_error_demographic(*e.demographic, e.absorbing, e.reflecting,
                                                    e.grid, e.x0, e.horizon, cfg.windows, e.dt, rng, wo)
                    : finite_time_error_reflection(e.model, e.scheme, e.absorbing, e.reflecting,
                                                   e.grid, e.x0, e.horizon, cfg.windows, e.dt, rng, wo);
  rep.finite_error = fe.mean_distance;
  rep.kill_prob_before_T = fe.kill_probability;
  rep.samples = fe.windows;
  rep.bound = wasserstein_bound(rep.finite_error, rep.gamma, rep.horizon);

  write_scalar(dir / "finite_error.txt", rep.finite_error, hash);
  write_scalar(dir / "bound.txt", rep.bound, hash);
  const KeyValues kv{{"experiment", e.name},
                     {"case", to_string(rep.kind)},
                     {"T", format_double(rep.horizon)},
                     {"finite_error", format_double(rep.finite_error)},
                     {"gamma", format_double(rep.gamma)},
                     {"alpha", format_double(rep.alpha)},
                     {"bound", format_double(rep.bound)},
                     {"kill_prob_before_T", format_double(rep.kill_prob_before_T)},
                     {"samples", std::to_string(rep.samples)}};
  write_key_values(dir / "sensitivity_report.txt", kv, hash);

  const fs::path summary = dir / "sensitivity_summary.csv";
  const bool fresh = !fs::exists(summary);
  std::ofstream out(summary, std::ios::app);
  if (!out) throw Error("cannot write " + summary.string());
  if (fresh) {
    out << provenance_line(hash) << '\n';
    for (std::size_t i = 0; i < kv.size(); ++i) out << kv[i].first << ',';
    out << "config_hash\n";
  }
  for (const auto& [k, v] : kv) out << v << ',';
  out << hash << '\n';

  std::cout << "finite_error=" << format_double(rep.finite_error) << " gamma=" << format_double(rep.gamma)
            << " bound=" << format_double(rep.bound) << '\n';
  return kExitOk;
}

int cmd_solve(const RunConfig& cfg) {
  const NamedExperiment e = configured_experiment(cfg);
  const fs::path dir(cfg.output);
  const std::string hash = cfg.hash();
  DensityGrid v = read_density_csv(cfg.input);
  if (!(v.grid == e.grid)) throw GridMismatch("reference grid does not match the experiment grid");
  double lambda = 0.0;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else {
    const fs::path lam = fs::path(cfg.input).parent_path() / "lambda.txt";
    const auto vals = read_values(lam);
    if (vals.size() != 1) throw ConfigError("no --lambda given and " + lam.string() + " is unusable");
    lambda = vals.front();
  }
  const SolveResult sol = solve_reference(e, lambda, v, cfg.workers);
  write_density_csv(dir / "u.csv", sol.u, hash);
  write_key_values(dir / "solve_report.txt", report_values(sol.report), hash);
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  cfg.workers = default_workers();
  CLI::App app{"Quasi-stationary distributions of killed diffusions"};
  app.set_config("--config", "", "flat key=value config file (command-line flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  double seed = 1.0;
  app.add_option("--experiment", cfg.experiment, "ou, wright_fisher, ring, single_well, double_well, lotka_volterra, rossler");
  app.add_option("--steps", cfg.steps, "total sampler steps (e.g. 1e7)");
  app.add_option("--dt", cfg.dt, "time step");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--streams", cfg.streams, "independent sampler streams");
  app.add_option("--workers", cfg.workers, "worker threads (default from QSD_WORKERS)");
  app.add_option("--bridge", cfg.bridge, "off, constant or modified");
  app.add_option("--cells", cfg.cells, "grid cells per axis")->delimiter(',');
  app.add_option("--blocks", cfg.blocks, "solver blocks per axis")->delimiter(',');
  app.add_option("--overlap", cfg.overlap, "block overlap in cells");
  app.add_option("--shift-passes", cfg.shift_passes, "shifting-block passes");
  app.add_flag("--invariant", cfg.invariant, "qsd: sample the no-kill modification");
  app.add_option("--sigma", cfg.sigma, "noise strength override");
  app.add_option("--epsilon", cfg.epsilon, "demographic / additive noise override");
  app.add_option("--matching", cfg.matching, "plus or minus noise matching");
  app.add_option("--horizon", cfg.horizon, "sensitivity horizon T");
  app.add_option("--windows", cfg.windows, "finite-time-error windows");
  app.add_option("--burn-in-windows", cfg.burn_in_windows, "discarded leading windows");
  app.add_option("--coupling-samples", cfg.coupling_samples, "coupled pairs");
  app.add_option("--coupling-dt", cfg.coupling_dt, "coupling time step");
  app.add_option("--far", cfg.far, "reflection or independent");
  app.add_option("--input", cfg.input, "solve: reference density CSV");
  app.add_option("--lambda", cfg.lambda, "solve: killing rate (default: lambda.txt beside the input)");
  app.add_option("--output", cfg.output, "output directory");

  app.add_subcommand("qsd", "sample, estimate the killing rate and solve");
  app.add_subcommand("sensitivity", "coupling rate, finite-time error and bound");
  app.add_subcommand("couple", "coupling-time tail fit only");
  app.add_subcommand("solve", "solver only, on an existing v.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (!(seed >= 0.0) || !is_integral(seed)) {
    std::cerr << "config error: seed must be a non-negative integer\n";
    return kExitConfig;
  }
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    cfg.validate();
    if (cfg.command == "qsd") return cmd_qsd(cfg);
    if (cfg.command == "couple") return cmd_couple(cfg);
    if (cfg.command == "sensitivity") return cmd_sensitivity(cfg);
    return cmd_solve(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FitRejected& e) {
    std::cerr << "fit rejected: " << e.what() << '\n';
    return kExitFitRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace qsd
