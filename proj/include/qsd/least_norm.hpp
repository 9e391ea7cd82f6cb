#pragma once

#include "qsd/fokker_planck.hpp"
#include "qsd/grid.hpp"
#include "qsd/sde.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <optional>
#include <vector>

namespace qsd {

inline constexpr double kPivotTolerance = 1e-12;

struct SolveReport {
  double residual_norm = 0.0;    // ||A u|| before clipping
  double correction_norm = 0.0;  // ||u - v|| before clipping
  std::optional<double> s_min;
  double clipped_mass = 0.0;     // total negative mass removed
  long blocks = 1;
};

/// Orthogonal projection onto the null space of a full-row-rank sparse A:
/// u = v - A^T (A A^T)^{-1} A v, via a sparse LDL^T factorization of A A^T
/// plus one step of iterative refinement.
class LeastNormProjector {
 public:
  explicit LeastNormProjector(SparseRowMatrix a, long block_id = -1);

  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  // (A A^T)^{-1} r
  Eigen::VectorXd solve_normal(const Eigen::VectorXd& r) const;
  const SparseRowMatrix& matrix() const { return a_; }

 private:
  SparseRowMatrix a_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool empty_ = false;
};

struct SolveResult {
  DensityGrid u;            // clipped, unit mass
  Eigen::VectorXd raw;      // projection before clipping, cell order
  SolveReport report;
};

/// Zeroes negative values and rescales to unit mass; returns the removed mass.
double clip_and_normalize(DensityGrid& u);

/// Least-norm point of {A u = 0} closest to v, then clipped and renormalized.
SolveResult least_norm_solve(const ConstraintMatrix& a, const DensityGrid& v);

struct BlockSpec {
  std::array<long, kMaxDim> blocks{1, 1, 1};
  long overlap = 0;
  long shift_passes = 3;
};

/// Core cell ranges [lo, hi) of one block.
struct Block {
  std::array<long, kMaxDim> lo{};
  std::array<long, kMaxDim> hi{};
};

/// Uniform decomposition; with `shifted` the block boundaries move by half a
/// block and the edge blocks are half size.
std::vector<Block> decompose(const GridSpec& grid, const BlockSpec& spec, bool shifted);

/// Per-block least-norm projections (blocks enlarged by the overlap margin and
/// restricted back), collaged, then clipped and renormalized globally.
SolveResult block_solve(const SdeModel& model, const GridSpec& grid, double lambda,
                        const DensityGrid& v, const BlockSpec& spec, int workers = 1,
                        bool shifted = false);

/// spec.shift_passes further block solves, alternating between the half-shifted
/// and the original decomposition, each using the previous output as reference.
DensityGrid shift_blocks(const SdeModel& model, const GridSpec& grid, double lambda,
                         const DensityGrid& u_prev, const BlockSpec& spec, int workers = 1);

struct InterfaceResidual {
  double max = 0.0;
  double rms = 0.0;
  long cells = 0;
};

/// |A u| over interior rows whose stencil reaches across a boundary of the
/// unshifted block decomposition.
InterfaceResidual interface_residual(const ConstraintMatrix& global, const DensityGrid& u,
                                     const BlockSpec& spec);

/// Smallest singular value of a short-wide A. Dense SVD for small matrices,
/// block inverse iteration on A A^T otherwise. Throws DiagnosticUnavailable
/// above max_rows.
double min_singular_value(const SparseRowMatrix& a, long max_rows = 200000);

struct RobustnessCheck {
  double diff_norm = 0.0;  // ||u - u1||_2 (before clipping)
  double diff_max = 0.0;   // ||u - u1||_inf
  double s_min = 0.0;
  double bound = 0.0;      // 2 eps ||v|| / s_min
};

/// Solves with lambda and lambda + eps and reports both sides of the
/// first-order perturbation bound.
RobustnessCheck lambda_robustness_check(const DiscretizedOperator& op, double lambda, double eps,
                                        const DensityGrid& v);

}  // namespace qsd
