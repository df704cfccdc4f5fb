#pragma once

#include "onlp/grg.hpp"
#include "onlp/matrix.hpp"

#include <cstddef>
#include <vector>

namespace onlp::grg::detail {

DenseMatrix gather_columns(const DenseMatrix& m, const std::vector<std::size_t>& cols);
Vector gather(const Vector& v, const std::vector<std::size_t>& idx);
void scatter(Vector& into, const std::vector<std::size_t>& idx, const Vector& values);

/// Jacobian of e at one point, held as the equality matrix plus the l x n
/// block of inequality gradients; the slack block is the identity. Products
/// cost O((m + l) n) and nothing of size (m + l) x (n + l) is formed.
class JacobianOp {
 public:
  JacobianOp(const AugmentedProblem& a, const Vector& y);

  /// J v for v over y.
  Vector times(const Vector& v) const;
  /// J^T u.
  Vector transpose_times(const Vector& u) const;
  Vector column(std::size_t j) const;
  /// The listed columns as a dense (m + l) x idx.size() matrix.
  DenseMatrix columns(const std::vector<std::size_t>& idx) const;
  /// Max absolute row sum.
  double norm_inf() const noexcept { return norm_inf_; }

 private:
  const AugmentedProblem* a_;
  DenseMatrix ineq_grad_;
  double norm_inf_ = 0.0;
};

/// Residual targets for refined solves: tight enough to leave no visible
/// error in the reduced gradient, and looser for predictor steps that Newton
/// restoration corrects anyway.
inline constexpr double kTightSolve = 1e-14;
inline constexpr double kLooseSolve = 1e-10;

/// Factorization of a basic Jacobian block that may be older than the block
/// it is applied to. Unit columns (basic slacks) are eliminated directly and
/// the remaining core gets an LU factorization; column replacements are kept
/// in product form on top. Solves refine against the current block, so
/// a stale factorization acts as a preconditioner and results are exact up to
/// the refinement tolerance. When refinement stalls the current block is
/// refactorized.
class BasisFactor {
 public:
  /// Factorizes block; throws BasisFailure when it is singular.
  void refactor(const DenseMatrix& block);
  bool valid() const noexcept { return valid_; }
  void invalidate() noexcept { valid_ = false; }
  std::size_t factorizations() const noexcept { return factorizations_; }

  /// Applies the stored factorization once, without refinement.
  Vector apply(const Vector& rhs) const;
  Vector apply_transpose(const Vector& rhs) const;

  /// Records that basic position p now holds a column with values column.
  /// Returns false when the replacement would make the block singular.
  bool replace_column(std::size_t p, const Vector& column);

  /// block * x = rhs, refined until the residual is below
  /// rel_tol * (|rhs| + |block| |x|) in the max norm.
  Vector solve(const DenseMatrix& block, const Vector& rhs, double rel_tol = kTightSolve);
  /// block^T * x = rhs.
  Vector solve_transpose(const DenseMatrix& block, const Vector& rhs, double rel_tol = kTightSolve);

 private:
  struct Eta {
    Eigen::Index pos;
    Vector w;
  };

  template <bool Transposed>
  Vector refined(const DenseMatrix& block, const Vector& rhs, double rel_tol);

  static constexpr std::size_t kMaxEtas = 64;

  Eigen::Index size_ = 0;
  // Block split into a core and unit columns; see refactor.
  std::vector<Eigen::Index> core_rows_;
  std::vector<Eigen::Index> core_cols_;
  std::vector<Eigen::Index> unit_rows_;
  std::vector<Eigen::Index> unit_cols_;
  DenseMatrix coupling_;
  LuFactor lu_;
  std::vector<Eta> etas_;
  bool valid_ = false;
  std::size_t factorizations_ = 0;
  // Refinement sweeps since the last factorization, and how many of them
  // cost about as much as factorizing again.
  std::size_t sweeps_ = 0;
  std::size_t sweep_budget_ = 0;
};

/// Newton restoration of the basic entries of y in place. Steps first apply
/// the stored factorization as is (chord steps); once a chord step fails to
/// contract the residual well, steps are solved against the Jacobian at the
/// current iterate. With cfg.chord_newton off every step refactorizes.
/// y_basic of the result is left empty.
RestoreResult restore(const AugmentedProblem& a, Vector& y, const BasisPartition& part,
                      BasisFactor& factor, const SolverConfig& cfg);

}  // namespace onlp::grg::detail
