#pragma once

#include "qsd/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>

namespace qsd {

using MultiIndex = std::array<long, kMaxDim>;

/// Rectangular cell-centered mesh over the numerical domain D.
/// Cells are numbered lexicographically with the last axis fastest.
struct GridSpec {
  int dim = 1;
  std::array<double, kMaxDim> lower{};
  std::array<double, kMaxDim> upper{};
  std::array<long, kMaxDim> cells{1, 1, 1};

  static GridSpec make(std::initializer_list<double> lo, std::initializer_list<double> hi,
                       std::initializer_list<long> n);

  // Throws ConfigError when an axis is degenerate or has fewer than min_cells cells.
  void validate(long min_cells = 4) const;

  double h(int axis) const { return (upper[axis] - lower[axis]) / static_cast<double>(cells[axis]); }
  double cell_volume() const;
  std::size_t size() const;

  bool contains(const State& x) const;
  std::optional<std::size_t> locate(const State& x) const;

  MultiIndex unravel(std::size_t flat) const;
  std::size_t ravel(const MultiIndex& idx) const;
  State center(std::size_t flat) const;
  double center(int axis, long i) const { return lower[axis] + (static_cast<double>(i) + 0.5) * h(axis); }

  bool is_interior(const MultiIndex& idx) const;

  bool operator==(const GridSpec& other) const;
};

/// Cell-centered density values on a grid, lexicographic order.
struct DensityGrid {
  GridSpec grid;
  Eigen::VectorXd values;

  DensityGrid() = default;
  DensityGrid(GridSpec g, Eigen::VectorXd v);
  explicit DensityGrid(const GridSpec& g) : grid(g), values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()))) {}

  double mass() const { return values.sum() * grid.cell_volume(); }
  // Scales to unit mass; throws GridMismatch if the mass is zero.
  void normalize();
};

}  // namespace qsd
