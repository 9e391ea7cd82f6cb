#pragma once

#include "qsd/grid.hpp"
#include "qsd/sde.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace qsd {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Central-difference Fokker-Planck operator on a cell-centered grid.
/// One row per interior cell; one column per cell. Columns are ordered
/// interior-first (interior cells lexicographically, then boundary cells), so
/// column r and row r refer to the same interior cell.
struct DiscretizedOperator {
  GridSpec grid;
  SparseRowMatrix a0;
  std::vector<std::size_t> cell_of_column;
  std::vector<std::size_t> column_of_cell;

  Eigen::Index rows() const { return a0.rows(); }
  Eigen::Index cols() const { return a0.cols(); }

  // Lexicographic cell vector -> interior-first column vector, and back.
  Eigen::VectorXd to_columns(const Eigen::VectorXd& cells) const;
  Eigen::VectorXd to_cells(const Eigen::VectorXd& columns) const;
};

/// Row c encodes -sum_i d_i(f_i u) + 1/2 sum_ij d_ij(D_ij u) with D = sigma sigma^T,
/// coefficients taken at the neighbouring cell centers (conservative form) and
/// the 4-point cross stencil for mixed derivatives.
DiscretizedOperator assemble_operator(const SdeModel& model, const GridSpec& grid);

/// A = A0 + lambda E with E = [I | 0] selecting interior columns; lambda > 0 is
/// the killing rate, so a QSD density u solves A u = 0.
struct ConstraintMatrix {
  GridSpec grid;
  std::vector<std::size_t> cell_of_column;
  std::vector<std::size_t> column_of_cell;
  double lambda = 0.0;
  SparseRowMatrix a;

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }

  // A u for u in interior-first column order.
  Eigen::VectorXd apply(const Eigen::VectorXd& columns) const { return a * columns; }
  Eigen::VectorXd to_columns(const Eigen::VectorXd& cells) const;
  Eigen::VectorXd to_cells(const Eigen::VectorXd& columns) const;
};

ConstraintMatrix constraint_matrix(const DiscretizedOperator& op, double lambda);

/// Matrix Market coordinate export (1-based indices, general real).
void write_matrix_market(std::ostream& out, const SparseRowMatrix& m);

}  // namespace qsd
