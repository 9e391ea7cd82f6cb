#include "qsd/cli.hpp"
#include "qsd/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace qsd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qsd_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "qsd");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("density csv round trip is bit exact") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  const GridSpec g = GridSpec::make({-1.0, 0.1}, {2.0, 0.7}, {6, 5});
  DensityGrid d(g);
  RngStream rng(1, 0);
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values(i) = rng.uniform() / 3.0;
  write_density_csv(dir / "d.csv", d, "abc");
  const DensityGrid back = read_density_csv(dir / "d.csv");
  CHECK(back.grid == g);
  CHECK(back.values == d.values);
  CHECK(slurp(dir / "d.csv").rfind(provenance_line("abc"), 0) == 0);

  // without the grid comment the grid is inferred from the centers
  std::ifstream in(dir / "d.csv");
  std::ofstream out(dir / "bare.csv");
  for (std::string line; std::getline(in, line);)
    if (line.rfind("# grid", 0) != 0) out << line << '\n';
  out.close();
  const DensityGrid inferred = read_density_csv(dir / "bare.csv");
  CHECK(inferred.grid.cells == g.cells);
  CHECK(inferred.grid.lower[0] == doctest::Approx(-1.0));
  CHECK(inferred.grid.upper[1] == doctest::Approx(0.7));
  CHECK(inferred.values == d.values);
}

TEST_CASE("values and key-value files") {
  const fs::path dir = scratch("kv");
  fs::create_directories(dir);
  const std::vector<double> xs{0.1, 1.0 / 3.0, 1e-300, -2.5e12};
  write_values(dir / "v.txt", xs, "h");
  CHECK(read_values(dir / "v.txt") == xs);
  const KeyValues kv{{"gamma", format_double(2.031414)}, {"accepted", "1"}};
  write_key_values(dir / "k.txt", kv, "h");
  CHECK(read_key_values(dir / "k.txt") == kv);
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(255) == "00000000000000ff");
  CHECK_THROWS_AS(read_values(dir / "missing.txt"), Error);
}

TEST_CASE("config validation and hashing") {
  RunConfig cfg;
  cfg.command = "qsd";
  CHECK_NOTHROW(cfg.validate());
  RunConfig other = cfg;
  other.workers = 4;
  other.output = "elsewhere";
  CHECK(other.hash() == cfg.hash());
  other.seed = 2;
  CHECK(other.hash() != cfg.hash());
  RunConfig bad = cfg;
  bad.dt = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.matching = "sideways";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.cells = {10, 10};
  CHECK_THROWS_AS(configured_experiment(bad), ConfigError);
}

TEST_CASE("qsd command is deterministic and writes its outputs") {
  const fs::path a = scratch("qsd_a"), b = scratch("qsd_b");
  const std::vector<std::string> common{"qsd", "--experiment", "ou", "--steps", "2e5", "--cells", "64",
                                        "--seed", "11"};
  auto with_output = [&](const fs::path& dir, const std::string& workers) {
    std::vector<std::string> args = common;
    args.insert(args.end(), {"--output", dir.string(), "--streams", "2", "--workers", workers});
    return args;
  };
  const int code_a = run(with_output(a, "1"));
  const int code_b = run(with_output(b, "2"));
  CHECK((code_a == kExitOk || code_a == kExitTailRejected));
  CHECK(code_a == code_b);
  for (const char* f : {"v.csv", "u.csv", "lambda.txt", "taus.txt", "tail_acceptance.csv", "solve_report.txt"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const DensityGrid u = read_density_csv(a / "u.csv");
  CHECK(u.mass() == doctest::Approx(1.0));
  CHECK(u.values.minCoeff() >= 0.0);

  // solver-only rerun on the written reference density
  const fs::path s = scratch("solve");
  CHECK(run({"solve", "--experiment", "ou", "--cells", "64", "--input", (a / "v.csv").string(), "--output",
             s.string()}) == kExitOk);
  CHECK(read_density_csv(s / "u.csv").values == u.values);
}

TEST_CASE("config file and argument errors") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "experiment = \"single_well\"\ncoupling-samples = 300\ncoupling-dt = 0.01\noutput = \""
        << (dir / "out").generic_string() << "\"\n";
  }
  // 300 pairs leave the survival intervals too wide for an accepted fit
  CHECK(run({"couple", "--config", (dir / "run.toml").string()}) == kExitFitRejected);
  CHECK(fs::exists(dir / "out" / "coupling_times.txt"));
  CHECK(fs::exists(dir / "out" / "tail_fit.txt"));

  {
    std::ofstream cfg(dir / "bad.toml");
    cfg << "experiment = \"ou\"\nno_such_key = 3\n";
  }
  CHECK(run({"qsd", "--config", (dir / "bad.toml").string()}) == kExitConfig);
  CHECK(run({"qsd", "--experiment", "lorenz", "--output", (dir / "x").string()}) == kExitConfig);
  CHECK(run({"qsd", "--steps", "-5", "--output", (dir / "x").string()}) == kExitConfig);
  CHECK(run({"solve", "--input", (dir / "nothing.csv").string(), "--output", (dir / "x").string()}) != kExitOk);
  CHECK(run({}) == kExitConfig);
}

TEST_CASE("sensitivity command writes a report") {
  const fs::path dir = scratch("sens");
  REQUIRE(run({"sensitivity", "--experiment", "single_well", "--coupling-samples", "3000",
               "--coupling-dt", "0.01", "--windows", "300", "--dt", "0.01", "--output", dir.string()}) == kExitOk);
  CHECK(fs::exists(dir / "bound.txt"));
  CHECK(fs::exists(dir / "gamma.txt"));
  CHECK(fs::exists(dir / "sensitivity_summary.csv"));
  const KeyValues kv = read_key_values(dir / "sensitivity_report.txt");
  CHECK_FALSE(kv.empty());
}

TEST_CASE("installed binary runs") {
  const char* exe = std::getenv("QSD_CLI");
  if (exe == nullptr) return;
  const fs::path dir = scratch("exe");
  const std::string cmd = std::string(exe) + " qsd --experiment wright_fisher --steps 1e5 --output " +
                          dir.string() + " > " + (fs::temp_directory_path() / "qsd_exe.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(status != -1);
  CHECK(fs::exists(dir / "u.csv"));
  const std::string bad = std::string(exe) + " qsd --experiment nope > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == kExitConfig);
}
