#pragma once

#include "onlp/matrix.hpp"
#include "onlp/permutation.hpp"

#include <cstddef>

namespace onlp {

/// q(x) = 1/2 x^T Q x + c^T x + d with Q symmetric.
///
/// Q is held either as a full dense matrix or, for separable forms, as its
/// diagonal. Both representations are closed under the masking operations
/// (shift, positive scaling, symmetric permutation). Separable storage is what
/// keeps hundreds of quadratic inequality rows over thousands of variables in
/// memory.
class QuadraticForm {
 public:
  QuadraticForm() = default;

  /// Dense Q is symmetrized on construction: Q <- (Q + Q^T) / 2.
  static QuadraticForm dense(DenseMatrix quad, Vector lin, double const_term = 0.0);
  static QuadraticForm diagonal(Vector quad_diag, Vector lin, double const_term = 0.0);
  /// Linear function (Q = 0, stored diagonally).
  static QuadraticForm linear(Vector lin, double const_term = 0.0);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lin_.size()); }
  bool is_diagonal() const noexcept { return diagonal_; }

  /// Dense Q; only valid when !is_diagonal().
  const DenseMatrix& quad() const noexcept { return quad_; }
  /// Diagonal of Q; only valid when is_diagonal().
  const Vector& quad_diag() const noexcept { return diag_; }
  const Vector& lin() const noexcept { return lin_; }
  double const_term() const noexcept { return const_; }

  /// Q as a dense matrix regardless of storage.
  DenseMatrix quad_dense() const;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// Q v.
  Vector hess_times(const Vector& v) const;
  /// v^T Q v.
  double curvature(const Vector& v) const;

  /// Form in w = x + shift: returns p with p(w) = q(w - shift).
  QuadraticForm shifted(const Vector& shift) const;
  QuadraticForm scaled(double factor) const;
  QuadraticForm with_const_term(double const_term) const;
  /// Reorders variables: result(Px) = q(x) for the vector permutation P.
  QuadraticForm permuted(const Permutation& p) const;

 private:
  void check_dim(std::size_t n) const;

  bool diagonal_ = true;
  DenseMatrix quad_;
  Vector diag_;
  Vector lin_;
  double const_ = 0.0;
};

double eval_quadratic(const QuadraticForm& q, const Vector& x);
Vector grad_quadratic(const QuadraticForm& q, const Vector& x);

}  // namespace onlp
