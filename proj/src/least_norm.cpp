#include "qsd/least_norm.hpp"

#include "qsd/parallel.hpp"
#include "qsd/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace qsd {

LeastNormProjector::LeastNormProjector(SparseRowMatrix a, long block_id) : a_(std::move(a)) {
  if (a_.rows() == 0) {
    empty_ = true;
    return;
  }
  if (a_.rows() >= a_.cols())
    throw ConfigError("least-norm projection needs fewer constraints than unknowns");
  const Eigen::SparseMatrix<double> aat = Eigen::SparseMatrix<double>(a_ * a_.transpose());
  ldlt_.compute(aat);
  if (ldlt_.info() != Eigen::Success)
    throw RankDeficiency("factorization of A A^T failed in block " + std::to_string(block_id), block_id);
  const Eigen::VectorXd dvec = ldlt_.vectorD();
  const double dmax = dvec.cwiseAbs().maxCoeff();
  const double dmin = dvec.minCoeff();
  if (!(dmin > kPivotTolerance * dmax))
    throw RankDeficiency("A A^T is numerically singular in block " + std::to_string(block_id), block_id);
}

Eigen::VectorXd LeastNormProjector::solve_normal(const Eigen::VectorXd& r) const {
  return ldlt_.solve(r);
}

Eigen::VectorXd LeastNormProjector::project(const Eigen::VectorXd& v) const {
  if (v.size() != a_.cols()) throw GridMismatch("reference vector length does not match A");
  if (empty_) return v;
  Eigen::VectorXd u = v - a_.transpose() * ldlt_.solve(a_ * v);
  // one refinement sweep removes most of the round-off left by the normal equations
  u -= a_.transpose() * ldlt_.solve(a_ * u);
  return u;
}

double clip_and_normalize(DensityGrid& u) {
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    if (u.values(i) < 0.0) {
      clipped -= u.values(i);
      u.values(i) = 0.0;
    }
  }
  clipped *= u.grid.cell_volume();
  u.normalize();
  return clipped;
}

SolveResult least_norm_solve(const ConstraintMatrix& a, const DensityGrid& v) {
  if (!(v.grid == a.grid)) throw GridMismatch("reference density lives on a different grid");
  const LeastNormProjector projector(a.a);
  const Eigen::VectorXd vc = a.to_columns(v.values);
  const Eigen::VectorXd uc = projector.project(vc);

  SolveResult out;
  out.raw = a.to_cells(uc);
  out.report.residual_norm = (a.a * uc).norm();
  out.report.correction_norm = (uc - vc).norm();
  out.u = DensityGrid(v.grid, out.raw);
  out.report.clipped_mass = clip_and_normalize(out.u);
  return out;
}

namespace {

std::vector<long> cut_points(long n, long k, bool shifted) {
  const long b = n / k;
  std::vector<long> cuts{0};
  if (shifted && k > 1) {
    for (long c = b / 2; c < n; c += b)
      if (c > 0) cuts.push_back(c);
  } else {
    for (long j = 1; j < k; ++j) cuts.push_back(j * b);
  }
  cuts.push_back(n);
  return cuts;
}

GridSpec sub_grid(const GridSpec& g, const std::array<long, kMaxDim>& lo,
                  const std::array<long, kMaxDim>& hi) {
  GridSpec s = g;
  for (int k = 0; k < g.dim; ++k) {
    const double h = g.h(k);
    s.lower[k] = lo[k] == 0 ? g.lower[k] : g.lower[k] + static_cast<double>(lo[k]) * h;
    s.upper[k] = hi[k] == g.cells[k] ? g.upper[k] : g.lower[k] + static_cast<double>(hi[k]) * h;
    s.cells[k] = hi[k] - lo[k];
  }
  return s;
}

}  // namespace

std::vector<Block> decompose(const GridSpec& grid, const BlockSpec& spec, bool shifted) {
  std::array<std::vector<long>, kMaxDim> cuts;
  for (int k = 0; k < grid.dim; ++k) {
    const long kb = spec.blocks[k];
    if (kb < 1 || grid.cells[k] % kb != 0)
      throw ConfigError("grid axis " + std::to_string(k) + " is not divisible by the block count");
    cuts[k] = cut_points(grid.cells[k], kb, shifted);
  }
  std::vector<Block> out;
  std::array<std::size_t, kMaxDim> pos{};
  while (true) {
    Block b;
    for (int k = 0; k < grid.dim; ++k) {
      b.lo[k] = cuts[k][pos[k]];
      b.hi[k] = cuts[k][pos[k] + 1];
    }
    out.push_back(b);
    int k = grid.dim - 1;
    for (; k >= 0; --k) {
      if (++pos[k] + 1 < cuts[k].size()) break;
      pos[k] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

SolveResult block_solve(const SdeModel& model, const GridSpec& grid, double lambda,
                        const DensityGrid& v, const BlockSpec& spec, int workers, bool shifted) {
  if (!(v.grid == grid)) throw GridMismatch("reference density lives on a different grid");
  if (spec.overlap < 0) throw ConfigError("overlap margin must be non-negative");
  const std::vector<Block> blocks = decompose(grid, spec, shifted);

  Eigen::VectorXd raw = v.values;
  std::vector<double> residual2(blocks.size(), 0.0);

  parallel_for(blocks.size(), workers, [&](std::size_t bi) {
    const Block& core = blocks[bi];
    Block big = core;
    bool solvable = true;
    for (int k = 0; k < grid.dim; ++k) {
      big.lo[k] = std::max(0L, core.lo[k] - spec.overlap);
      big.hi[k] = std::min(grid.cells[k], core.hi[k] + spec.overlap);
      if (big.hi[k] - big.lo[k] < 3) solvable = false;
    }
    if (!solvable) return;  // no interior rows: projection is the identity

    const GridSpec local = sub_grid(grid, big.lo, big.hi);
    const std::size_t nloc = local.size();
    Eigen::VectorXd vloc(static_cast<Eigen::Index>(nloc));
    std::vector<std::size_t> global_of_local(nloc);
    for (std::size_t c = 0; c < nloc; ++c) {
      MultiIndex idx = local.unravel(c);
      for (int k = 0; k < grid.dim; ++k) idx[k] += big.lo[k];
      global_of_local[c] = grid.ravel(idx);
      vloc(static_cast<Eigen::Index>(c)) = v.values(static_cast<Eigen::Index>(global_of_local[c]));
    }

    const ConstraintMatrix cm = constraint_matrix(assemble_operator(model, local), lambda);
    const LeastNormProjector projector(cm.a, static_cast<long>(bi));
    const Eigen::VectorXd uc = projector.project(cm.to_columns(vloc));
    residual2[bi] = (cm.a * uc).squaredNorm();
    const Eigen::VectorXd uloc = cm.to_cells(uc);

    for (std::size_t c = 0; c < nloc; ++c) {
      const MultiIndex idx = local.unravel(c);
      bool in_core = true;
      for (int k = 0; k < grid.dim; ++k) {
        const long gi = idx[k] + big.lo[k];
        if (gi < core.lo[k] || gi >= core.hi[k]) in_core = false;
      }
      if (in_core) raw(static_cast<Eigen::Index>(global_of_local[c])) = uloc(static_cast<Eigen::Index>(c));
    }
  });

  SolveResult out;
  out.raw = raw;
  double r2 = 0.0;
  for (double r : residual2) r2 += r;
  out.report.residual_norm = std::sqrt(r2);
  out.report.correction_norm = (raw - v.values).norm();
  out.report.blocks = static_cast<long>(blocks.size());
  out.u = DensityGrid(grid, raw);
  out.report.clipped_mass = clip_and_normalize(out.u);
  return out;
}

DensityGrid shift_blocks(const SdeModel& model, const GridSpec& grid, double lambda,
                         const DensityGrid& u_prev, const BlockSpec& spec, int workers) {
  DensityGrid u = u_prev;
  for (long pass = 0; pass < spec.shift_passes; ++pass) {
    const bool shifted = pass % 2 == 0;
    u = block_solve(model, grid, lambda, u, spec, workers, shifted).u;
  }
  return u;
}

InterfaceResidual interface_residual(const ConstraintMatrix& global, const DensityGrid& u,
                                     const BlockSpec& spec) {
  const GridSpec& g = global.grid;
  if (!(u.grid == g)) throw GridMismatch("density lives on a different grid");
  const Eigen::VectorXd r = global.apply(global.to_columns(u.values));

  InterfaceResidual out;
  double sum2 = 0.0;
  for (Eigen::Index row = 0; row < r.size(); ++row) {
    const MultiIndex idx = g.unravel(global.cell_of_column[static_cast<std::size_t>(row)]);
    bool near = false;
    for (int k = 0; k < g.dim && !near; ++k) {
      if (spec.blocks[k] <= 1) continue;
      const long b = g.cells[k] / spec.blocks[k];
      const long m = idx[k] % b;
      near = (m == 0 && idx[k] != 0) || (m == b - 1 && idx[k] != g.cells[k] - 1);
    }
    if (!near) continue;
    const double a = std::abs(r(row));
    out.max = std::max(out.max, a);
    sum2 += a * a;
    ++out.cells;
  }
  if (out.cells > 0) out.rms = std::sqrt(sum2 / static_cast<double>(out.cells));
  return out;
}

double min_singular_value(const SparseRowMatrix& a, long max_rows) {
  if (a.rows() == 0) throw DiagnosticUnavailable("matrix has no rows");
  if (a.rows() > max_rows) throw DiagnosticUnavailable("matrix too large for the s_min diagnostic");
  if (a.cols() <= 1500) {
    const Eigen::MatrixXd dense(a);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    return svd.singularValues().minCoeff();
  }

  // block inverse iteration with Rayleigh-Ritz on A A^T
  const LeastNormProjector normal(a);
  const SparseRowMatrix& m = normal.matrix();
  const Eigen::Index n = m.rows();
  const Eigen::Index k = std::min<Eigen::Index>(8, n);
  RngStream rng(12345, 0);
  Eigen::MatrixXd q(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) q(i, j) = rng.normal();
  double prev = -1.0;
  for (int it = 0; it < 5000; ++it) {
    Eigen::MatrixXd z(n, k);
    for (Eigen::Index j = 0; j < k; ++j) z.col(j) = normal.solve_normal(q.col(j));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    const Eigen::MatrixXd aq = m.transpose() * q;
    const Eigen::MatrixXd h = aq.transpose() * aq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double theta = eig.eigenvalues()(0);
    q = q * eig.eigenvectors();
    if (prev > 0.0 && std::abs(theta - prev) <= 1e-13 * theta) return std::sqrt(theta);
    prev = theta;
  }
  return std::sqrt(prev);
}

RobustnessCheck lambda_robustness_check(const DiscretizedOperator& op, double lambda, double eps,
                                        const DensityGrid& v) {
  const ConstraintMatrix a = constraint_matrix(op, lambda);
  const ConstraintMatrix a1 = constraint_matrix(op, lambda + eps);
  const Eigen::VectorXd vc = a.to_columns(v.values);
  const Eigen::VectorXd u = LeastNormProjector(a.a).project(vc);
  const Eigen::VectorXd u1 = LeastNormProjector(a1.a).project(vc);

  RobustnessCheck out;
  out.diff_norm = (u - u1).norm();
  out.diff_max = (u - u1).cwiseAbs().maxCoeff();
  out.s_min = min_singular_value(a.a);
  out.bound = 2.0 * std::abs(eps) * vc.norm() / out.s_min;
  return out;
}

}  // namespace qsd
