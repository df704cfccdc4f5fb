#include "onlp/quadratic.hpp"

#include "onlp/errors.hpp"

#include <cmath>
#include <string>

namespace onlp {

QuadraticForm QuadraticForm::dense(DenseMatrix quad, Vector lin, double const_term) {
  if (quad.rows() != quad.cols() || quad.rows() != lin.size()) {
    throw DomainError("quadratic form: Q must be n x n with n = len(c)");
  }
  if (!quad.allFinite() || !lin.allFinite() || !std::isfinite(const_term)) {
    throw DomainError("quadratic form: non-finite coefficient");
  }
  QuadraticForm q;
  q.diagonal_ = false;
  q.quad_ = 0.5 * (quad + quad.transpose());
  q.lin_ = std::move(lin);
  q.const_ = const_term;
  return q;
}

QuadraticForm QuadraticForm::diagonal(Vector quad_diag, Vector lin, double const_term) {
  if (quad_diag.size() != lin.size()) {
    throw DomainError("quadratic form: diagonal and linear term differ in length");
  }
  if (!quad_diag.allFinite() || !lin.allFinite() || !std::isfinite(const_term)) {
    throw DomainError("quadratic form: non-finite coefficient");
  }
  QuadraticForm q;
  q.diagonal_ = true;
  q.diag_ = std::move(quad_diag);
  q.lin_ = std::move(lin);
  q.const_ = const_term;
  return q;
}

QuadraticForm QuadraticForm::linear(Vector lin, double const_term) {
  Vector zero = Vector::Zero(lin.size());
  return diagonal(std::move(zero), std::move(lin), const_term);
}

DenseMatrix QuadraticForm::quad_dense() const {
  if (!diagonal_) return quad_;
  return DenseMatrix(diag_.asDiagonal());
}

void QuadraticForm::check_dim(std::size_t n) const {
  if (n != dim()) {
    throw DomainError("quadratic form of dimension " + std::to_string(dim()) +
                      " evaluated at vector of length " + std::to_string(n));
  }
}

Vector QuadraticForm::hess_times(const Vector& v) const {
  check_dim(static_cast<std::size_t>(v.size()));
  if (diagonal_) return diag_.cwiseProduct(v);
  return quad_ * v;
}

double QuadraticForm::curvature(const Vector& v) const {
  check_dim(static_cast<std::size_t>(v.size()));
  if (diagonal_) return (diag_.array() * v.array().square()).sum();
  return v.dot(quad_ * v);
}

double QuadraticForm::value(const Vector& x) const {
  check_dim(static_cast<std::size_t>(x.size()));
  return 0.5 * curvature(x) + lin_.dot(x) + const_;
}

Vector QuadraticForm::gradient(const Vector& x) const { return hess_times(x) + lin_; }

QuadraticForm QuadraticForm::shifted(const Vector& shift) const {
  check_dim(static_cast<std::size_t>(shift.size()));
  // q(w - r) = 1/2 w'Qw + (c - Qr)'w + (d - c'r + 1/2 r'Qr)
  const Vector qr = hess_times(shift);
  QuadraticForm out = *this;
  out.lin_ = lin_ - qr;
  out.const_ = const_ - lin_.dot(shift) + 0.5 * shift.dot(qr);
  return out;
}

QuadraticForm QuadraticForm::scaled(double factor) const {
  QuadraticForm out = *this;
  if (diagonal_) {
    out.diag_ *= factor;
  } else {
    out.quad_ *= factor;
  }
  out.lin_ *= factor;
  out.const_ *= factor;
  return out;
}

QuadraticForm QuadraticForm::with_const_term(double const_term) const {
  QuadraticForm out = *this;
  out.const_ = const_term;
  return out;
}

QuadraticForm QuadraticForm::permuted(const Permutation& p) const {
  check_dim(p.size());
  QuadraticForm out;
  out.diagonal_ = diagonal_;
  out.const_ = const_;
  out.lin_ = p.apply(lin_);
  if (diagonal_) {
    out.diag_ = p.apply(diag_);
  } else {
    out.quad_ = apply_sym_perm(p, quad_);
  }
  return out;
}

double eval_quadratic(const QuadraticForm& q, const Vector& x) { return q.value(x); }
Vector grad_quadratic(const QuadraticForm& q, const Vector& x) { return q.gradient(x); }

}  // namespace onlp
