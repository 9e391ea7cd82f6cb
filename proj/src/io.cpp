#include "qsd/io.hpp"

#include "qsd/types.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace qsd {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos)
    throw Error("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance_line(const std::string& config_hash) { return "# config_hash=" + config_hash; }

void write_density_csv(const fs::path& path, const DensityGrid& d, const std::string& config_hash) {
  std::ofstream out = open_out(path);
  const GridSpec& g = d.grid;
  out << provenance_line(config_hash) << '\n';
  out << "# grid dim=" << g.dim;
  for (int a = 0; a < g.dim; ++a)
    out << " axis" << a << '=' << format_double(g.lower[a]) << ':' << format_double(g.upper[a])
        << ':' << g.cells[a];
  out << '\n';
  for (int a = 0; a < g.dim; ++a) out << "axis" << a << "_center,";
  out << "density\n";
  for (std::size_t c = 0; c < g.size(); ++c) {
    const MultiIndex idx = g.unravel(c);
    for (int a = 0; a < g.dim; ++a) out << format_double(g.center(a, idx[a])) << ',';
    out << format_double(d.values(static_cast<Eigen::Index>(c))) << '\n';
  }
}

DensityGrid read_density_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::optional<GridSpec> declared;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# grid ", 0) == 0) {
        GridSpec g;
        for (const auto& tok : split(line.substr(7), ' ')) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
          if (key == "dim") {
            g.dim = std::stoi(val);
          } else if (key.rfind("axis", 0) == 0) {
            const int a = std::stoi(key.substr(4));
            const auto parts = split(val, ':');
            if (a < 0 || a >= kMaxDim || parts.size() != 3) throw Error("bad grid line in " + path.string());
            g.lower[a] = parse_double(parts[0]);
            g.upper[a] = parse_double(parts[1]);
            g.cells[a] = std::stol(parts[2]);
          }
        }
        declared = g;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& f : split(line, ',')) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("no density rows in " + path.string());
  const int dim = static_cast<int>(rows.front().size()) - 1;
  if (dim < 1 || dim > kMaxDim) throw Error("bad column count in " + path.string());

  GridSpec g;
  if (declared) {
    g = *declared;
  } else {
    // Infer a uniform grid from the distinct centers on each axis.
    g.dim = dim;
    for (int a = 0; a < dim; ++a) {
      std::set<double> centers;
      for (const auto& r : rows) centers.insert(r[static_cast<std::size_t>(a)]);
      if (centers.size() < 2) throw Error("cannot infer grid spacing from " + path.string());
      const double h = (*centers.rbegin() - *centers.begin()) / static_cast<double>(centers.size() - 1);
      g.lower[a] = *centers.begin() - 0.5 * h;
      g.upper[a] = *centers.rbegin() + 0.5 * h;
      g.cells[a] = static_cast<long>(centers.size());
    }
  }
  if (g.dim != dim || g.size() != rows.size()) throw GridMismatch("row count does not match grid in " + path.string());

  DensityGrid d(g);
  for (const auto& r : rows) {
    State x(dim);
    for (int a = 0; a < dim; ++a) x(a) = r[static_cast<std::size_t>(a)];
    const auto cell = g.locate(x);
    if (!cell) throw GridMismatch("cell center outside grid in " + path.string());
    d.values(static_cast<Eigen::Index>(*cell)) = r.back();
  }
  return d;
}

void write_values(const fs::path& path, const std::vector<double>& values,
                  const std::string& config_hash) {
  std::ofstream out = open_out(path);
  out << provenance_line(config_hash) << '\n';
  for (double v : values) out << format_double(v) << '\n';
}

std::vector<double> read_values(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_double(line));
  }
  return out;
}

void write_key_values(const fs::path& path, const KeyValues& kv, const std::string& config_hash) {
  std::ofstream out = open_out(path);
  out << provenance_line(config_hash) << '\n';
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues read_key_values(const fs::path& path) {
  std::ifstream in = open_in(path);
  KeyValues out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("expected key=value in " + path.string());
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

void write_survival_csv(const fs::path& path, const SurvivalCurve& curve,
                        const std::vector<double>& extra, const std::string& extra_name,
                        const std::string& config_hash) {
  std::ofstream out = open_out(path);
  out << provenance_line(config_hash) << '\n';
  out << "time,survivors,p,lower,upper";
  if (!extra.empty()) out << ',' << extra_name;
  out << '\n';
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << format_double(curve.times[i]) << ',' << curve.survivors[i] << ','
        << format_double(curve.p[i]) << ',' << format_double(curve.lower[i]) << ','
        << format_double(curve.upper[i]);
    if (!extra.empty()) out << ',' << format_double(extra[i]);
    out << '\n';
  }
}

}  // namespace qsd
