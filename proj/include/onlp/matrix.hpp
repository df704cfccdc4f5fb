#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace onlp {

/// Dense row-major matrix. Problem data is generated dense, so there is no
/// sparse path anywhere in the toolkit.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Relative pivot tolerance used by solve_linear and LuFactor.
inline constexpr double kPivotTolerance = 1e-12;

bool all_finite(const DenseMatrix& m);
bool all_finite(const Vector& v);

/// Max absolute row sum.
double norm_inf(const DenseMatrix& m);

/// LU factorization with partial pivoting that refuses singular input.
/// A pivot |u_ii| <= tol * max(1, max|a_ij|) is treated as zero.
class LuFactor {
 public:
  LuFactor() = default;
  explicit LuFactor(const DenseMatrix& a, double rel_tol = kPivotTolerance);

  /// Solves A x = rhs.
  Vector solve(const Vector& rhs) const;
  /// Solves A^T x = rhs.
  Vector solve_transpose(const Vector& rhs) const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(lu_.rows()); }
  bool empty() const noexcept { return lu_.rows() == 0; }

  /// Smallest |u_ii| divided by the largest, a cheap conditioning signal.
  double pivot_ratio() const noexcept { return pivot_ratio_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double pivot_ratio_ = 1.0;
};

/// Solves a square nonsingular system through an LU factorization with
/// partial pivoting; never forms an inverse. Throws SingularMatrix when a
/// pivot falls below the relative tolerance.
Vector solve_linear(const DenseMatrix& a, const Vector& rhs);

/// Numerical rank via column-pivoted Householder QR with threshold
/// rel_tol * ||A||_inf.
std::size_t numerical_rank(const DenseMatrix& a, double rel_tol);

}  // namespace onlp
