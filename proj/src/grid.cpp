#include "qsd/grid.hpp"

#include <cmath>
#include <string>

namespace qsd {

GridSpec GridSpec::make(std::initializer_list<double> lo, std::initializer_list<double> hi,
                        std::initializer_list<long> n) {
  if (lo.size() != hi.size() || lo.size() != n.size() || lo.size() == 0 ||
      lo.size() > static_cast<std::size_t>(kMaxDim))
    throw ConfigError("grid bounds and cell counts must have matching dimension 1..3");
  GridSpec g;
  g.dim = static_cast<int>(lo.size());
  std::copy(lo.begin(), lo.end(), g.lower.begin());
  std::copy(hi.begin(), hi.end(), g.upper.begin());
  std::copy(n.begin(), n.end(), g.cells.begin());
  return g;
}

void GridSpec::validate(long min_cells) const {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("grid dimension must be 1, 2 or 3");
  for (int k = 0; k < dim; ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(upper[k] > lower[k]))
      throw ConfigError("grid axis " + std::to_string(k) + " has an empty or non-finite range");
    if (cells[k] < min_cells)
      throw ConfigError("grid axis " + std::to_string(k) + " needs at least " +
                        std::to_string(min_cells) + " cells");
  }
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= h(k);
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(cells[k]);
  return n;
}

bool GridSpec::contains(const State& x) const {
  for (int k = 0; k < dim; ++k)
    if (!(x(k) >= lower[k] && x(k) <= upper[k])) return false;
  return true;
}

std::optional<std::size_t> GridSpec::locate(const State& x) const {
  MultiIndex idx{};
  for (int k = 0; k < dim; ++k) {
    const double t = (x(k) - lower[k]) / h(k);
    if (!(t >= 0.0) || !(t < static_cast<double>(cells[k]))) return std::nullopt;
    idx[k] = static_cast<long>(t);
  }
  return ravel(idx);
}

MultiIndex GridSpec::unravel(std::size_t flat) const {
  MultiIndex idx{};
  for (int k = dim - 1; k >= 0; --k) {
    idx[k] = static_cast<long>(flat % static_cast<std::size_t>(cells[k]));
    flat /= static_cast<std::size_t>(cells[k]);
  }
  return idx;
}

std::size_t GridSpec::ravel(const MultiIndex& idx) const {
  std::size_t flat = 0;
  for (int k = 0; k < dim; ++k) flat = flat * static_cast<std::size_t>(cells[k]) + static_cast<std::size_t>(idx[k]);
  return flat;
}

State GridSpec::center(std::size_t flat) const {
  const MultiIndex idx = unravel(flat);
  State c(dim);
  for (int k = 0; k < dim; ++k) c(k) = center(k, idx[k]);
  return c;
}

bool GridSpec::is_interior(const MultiIndex& idx) const {
  for (int k = 0; k < dim; ++k)
    if (idx[k] <= 0 || idx[k] >= cells[k] - 1) return false;
  return true;
}

bool GridSpec::operator==(const GridSpec& other) const {
  if (dim != other.dim) return false;
  for (int k = 0; k < dim; ++k)
    if (lower[k] != other.lower[k] || upper[k] != other.upper[k] || cells[k] != other.cells[k])
      return false;
  return true;
}

DensityGrid::DensityGrid(GridSpec g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != static_cast<Eigen::Index>(grid.size()))
    throw GridMismatch("density vector length does not match the grid");
}

void DensityGrid::normalize() {
  const double m = mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw GridMismatch("cannot normalize a grid with zero mass");
  values /= m;
}

}  // namespace qsd
