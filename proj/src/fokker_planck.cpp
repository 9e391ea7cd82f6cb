#include "qsd/fokker_planck.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace qsd {

namespace {

Eigen::VectorXd permute_to_columns(const std::vector<std::size_t>& column_of_cell,
                                   const Eigen::VectorXd& cells) {
  if (static_cast<std::size_t>(cells.size()) != column_of_cell.size())
    throw GridMismatch("vector length does not match the operator grid");
  Eigen::VectorXd out(cells.size());
  for (std::size_t c = 0; c < column_of_cell.size(); ++c)
    out(static_cast<Eigen::Index>(column_of_cell[c])) = cells(static_cast<Eigen::Index>(c));
  return out;
}

Eigen::VectorXd permute_to_cells(const std::vector<std::size_t>& cell_of_column,
                                 const Eigen::VectorXd& columns) {
  if (static_cast<std::size_t>(columns.size()) != cell_of_column.size())
    throw GridMismatch("vector length does not match the operator grid");
  Eigen::VectorXd out(columns.size());
  for (std::size_t j = 0; j < cell_of_column.size(); ++j)
    out(static_cast<Eigen::Index>(cell_of_column[j])) = columns(static_cast<Eigen::Index>(j));
  return out;
}

}  // namespace

Eigen::VectorXd DiscretizedOperator::to_columns(const Eigen::VectorXd& cells) const {
  return permute_to_columns(column_of_cell, cells);
}
Eigen::VectorXd DiscretizedOperator::to_cells(const Eigen::VectorXd& columns) const {
  return permute_to_cells(cell_of_column, columns);
}
Eigen::VectorXd ConstraintMatrix::to_columns(const Eigen::VectorXd& cells) const {
  return permute_to_columns(column_of_cell, cells);
}
Eigen::VectorXd ConstraintMatrix::to_cells(const Eigen::VectorXd& columns) const {
  return permute_to_cells(cell_of_column, columns);
}

DiscretizedOperator assemble_operator(const SdeModel& model, const GridSpec& grid) {
  grid.validate(3);
  if (grid.dim != model.dim) throw ConfigError("grid and model dimensions differ");
  const int d = grid.dim;
  const std::size_t n = grid.size();

  DiscretizedOperator op;
  op.grid = grid;
  op.column_of_cell.assign(n, 0);
  std::size_t next = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < n; ++c) {
      const bool interior = grid.is_interior(grid.unravel(c));
      if (interior == (pass == 0)) op.column_of_cell[c] = next++;
    }
  }
  op.cell_of_column.assign(n, 0);
  for (std::size_t c = 0; c < n; ++c) op.cell_of_column[op.column_of_cell[c]] = c;

  std::size_t rows = 1;
  for (int k = 0; k < d; ++k) rows *= static_cast<std::size_t>(grid.cells[k] - 2);

  // flux and diffusion tensor at every cell center
  std::vector<State> flux(n);
  std::vector<SmallMatrix> diff(n);
  for (std::size_t c = 0; c < n; ++c) {
    const State x = grid.center(c);
    flux[c] = model.drift(x);
    const SmallMatrix s = model.diffusion(x);
    diff[c] = s * s.transpose();
    if (!flux[c].allFinite() || !diff[c].allFinite())
      throw ConfigError("model coefficients are not finite at a cell center");
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(rows * static_cast<std::size_t>(1 + 2 * d + 2 * d * (d - 1)));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = op.cell_of_column[r];
    const MultiIndex idx = grid.unravel(c);
    const auto row = static_cast<Eigen::Index>(r);
    auto add = [&](const MultiIndex& at, double value) {
      const std::size_t cell = grid.ravel(at);
      trip.emplace_back(row, static_cast<Eigen::Index>(op.column_of_cell[cell]), value);
      return cell;
    };
    for (int i = 0; i < d; ++i) {
      const double h = grid.h(i);
      MultiIndex up = idx, dn = idx;
      up[i] += 1;
      dn[i] -= 1;
      const std::size_t cu = grid.ravel(up), cd = grid.ravel(dn);
      add(up, -flux[cu](i) / (2.0 * h) + 0.5 * diff[cu](i, i) / (h * h));
      add(dn, flux[cd](i) / (2.0 * h) + 0.5 * diff[cd](i, i) / (h * h));
      add(idx, -diff[c](i, i) / (h * h));
      for (int j = i + 1; j < d; ++j) {
        const double scale = 1.0 / (4.0 * h * grid.h(j));
        for (int si : {-1, 1}) {
          for (int sj : {-1, 1}) {
            MultiIndex at = idx;
            at[i] += si;
            at[j] += sj;
            const std::size_t ca = grid.ravel(at);
            add(at, static_cast<double>(si * sj) * diff[ca](i, j) * scale);
          }
        }
      }
    }
  }
  op.a0.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  op.a0.setFromTriplets(trip.begin(), trip.end());
  op.a0.prune(0.0);
  return op;
}

ConstraintMatrix constraint_matrix(const DiscretizedOperator& op, double lambda) {
  if (!std::isfinite(lambda)) throw ConfigError("killing rate must be finite");
  ConstraintMatrix cm;
  cm.grid = op.grid;
  cm.cell_of_column = op.cell_of_column;
  cm.column_of_cell = op.column_of_cell;
  cm.lambda = lambda;
  cm.a = op.a0;
  if (lambda != 0.0) {
    std::vector<Eigen::Triplet<double>> diag;
    diag.reserve(static_cast<std::size_t>(op.rows()));
    for (Eigen::Index r = 0; r < op.rows(); ++r) diag.emplace_back(r, r, lambda);
    SparseRowMatrix e(op.rows(), op.cols());
    e.setFromTriplets(diag.begin(), diag.end());
    cm.a += e;
  }
  return cm;
}

void write_matrix_market(std::ostream& out, const SparseRowMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseRowMatrix::InnerIterator it(m, r); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace qsd
