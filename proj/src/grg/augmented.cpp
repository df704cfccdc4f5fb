#include "onlp/errors.hpp"
#include "onlp/grg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace onlp::grg {

AugmentedProblem::AugmentedProblem(const NlpProblem& p)
    : objective_(p.objective()),
      eq_matrix_(p.eq_matrix()),
      eq_rhs_(p.eq_rhs()),
      ineqs_(p.ineqs()) {
  const auto n = static_cast<Eigen::Index>(p.n());
  const auto l = static_cast<Eigen::Index>(p.l());
  lower_.resize(n + l);
  upper_.resize(n + l);
  lower_.head(n) = p.lower();
  upper_.head(n) = p.upper();
  lower_.tail(l).setZero();
  upper_.tail(l).setConstant(std::numeric_limits<double>::infinity());
  if (eq_matrix_.rows() == 0) eq_matrix_.resize(0, n);
  if (eq_matrix_.rows() > 0) eq_norm_inf_ = norm_inf(eq_matrix_);
  stacked_ = std::all_of(ineqs_.begin(), ineqs_.end(),
                         [](const Inequality& q) { return q.form.is_diagonal(); });
  if (stacked_) {
    ineq_diag_.resize(l, n);
    ineq_lin_.resize(l, n);
    ineq_offset_.resize(l);
    for (Eigen::Index j = 0; j < l; ++j) {
      const Inequality& q = ineqs_[static_cast<std::size_t>(j)];
      ineq_diag_.row(j) = q.form.quad_diag().transpose();
      ineq_lin_.row(j) = q.form.lin().transpose();
      ineq_offset_[j] = q.form.const_term() - q.rhs;
    }
  }
}

NlpProblem normalize_inequalities(const NlpProblem& p, const Vector& z) {
  if (static_cast<std::size_t>(z.size()) != p.n()) {
    throw DomainError("normalize_inequalities: point has wrong dimension");
  }
  std::vector<Inequality> rows;
  rows.reserve(p.l());
  for (const Inequality& h : p.ineqs()) {
    const double w = h.form.gradient(z).norm();
    if (w > 0.0 && std::isfinite(w)) {
      rows.push_back({h.form.scaled(1.0 / w), h.rhs / w});
    } else {
      rows.push_back(h);
    }
  }
  return NlpProblem(NlpProblem::TrustedRank{}, p.objective(), p.eq_matrix(), p.eq_rhs(),
                    std::move(rows), p.lower(), p.upper());
}

AugmentedProblem augment(const NlpProblem& p) { return AugmentedProblem(p); }
AugmentedProblem augment(const EncryptedProblem& p) { return AugmentedProblem(p.problem()); }

void AugmentedProblem::check_dim(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != dim()) {
    throw DomainError("augmented point has length " + std::to_string(y.size()) + ", expected " +
                      std::to_string(dim()));
  }
}

double AugmentedProblem::objective(const Vector& y) const {
  check_dim(y);
  return objective_.value(y.head(static_cast<Eigen::Index>(n())));
}

Vector AugmentedProblem::objective_gradient(const Vector& y) const {
  check_dim(y);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim()));
  g.head(static_cast<Eigen::Index>(n())) = objective_.gradient(y.head(static_cast<Eigen::Index>(n())));
  return g;
}

double AugmentedProblem::objective_curvature(const Vector& d) const {
  check_dim(d);
  return objective_.curvature(d.head(static_cast<Eigen::Index>(n())));
}

double AugmentedProblem::objective_change(const Vector& y, const Vector& delta) const {
  check_dim(y);
  check_dim(delta);
  const auto nz = static_cast<Eigen::Index>(n());
  const Vector dz = delta.head(nz);
  // f(y + D) - f(y) = grad f(y)^T D + 1/2 D^T Q D for a quadratic f.
  return objective_.gradient(y.head(nz)).dot(dz) + 0.5 * objective_.curvature(dz);
}

Vector AugmentedProblem::ineq_values(const Vector& z) const {
  if (stacked_) {
    Vector h = ineq_offset_;
    h.noalias() += 0.5 * (ineq_diag_ * z.cwiseAbs2());
    h.noalias() += ineq_lin_ * z;
    return h;
  }
  Vector h(static_cast<Eigen::Index>(l()));
  for (std::size_t j = 0; j < l(); ++j) {
    h[static_cast<Eigen::Index>(j)] = ineqs_[j].form.value(z) - ineqs_[j].rhs;
  }
  return h;
}

DenseMatrix AugmentedProblem::ineq_gradients(const Vector& z) const {
  if (stacked_) {
    DenseMatrix g = ineq_lin_;
    g.array() += ineq_diag_.array().rowwise() * z.transpose().array();
    return g;
  }
  DenseMatrix g(static_cast<Eigen::Index>(l()), z.size());
  for (std::size_t j = 0; j < l(); ++j) {
    g.row(static_cast<Eigen::Index>(j)) = ineqs_[j].form.gradient(z).transpose();
  }
  return g;
}

Vector AugmentedProblem::constraint_curvatures(const Vector& d) const {
  check_dim(d);
  const auto nz = static_cast<Eigen::Index>(n());
  const auto nm = static_cast<Eigen::Index>(m());
  Vector c = Vector::Zero(nm + static_cast<Eigen::Index>(l()));
  const Vector dz = d.head(nz);
  if (stacked_) {
    c.tail(static_cast<Eigen::Index>(l())).noalias() = ineq_diag_ * dz.cwiseAbs2();
    return c;
  }
  for (std::size_t j = 0; j < l(); ++j) {
    c[nm + static_cast<Eigen::Index>(j)] = ineqs_[j].form.curvature(dz);
  }
  return c;
}

Vector AugmentedProblem::residual(const Vector& y) const {
  check_dim(y);
  const auto nz = static_cast<Eigen::Index>(n());
  const auto nm = static_cast<Eigen::Index>(m());
  const auto nl = static_cast<Eigen::Index>(l());
  Vector e(nm + nl);
  const Vector z = y.head(nz);
  if (nm > 0) e.head(nm) = eq_matrix_ * z - eq_rhs_;
  if (nl > 0) e.tail(nl) = ineq_values(z) + y.tail(nl);
  return e;
}

DenseMatrix AugmentedProblem::jacobian(const Vector& y) const {
  check_dim(y);
  const auto nz = static_cast<Eigen::Index>(n());
  const auto nm = static_cast<Eigen::Index>(m());
  const auto nl = static_cast<Eigen::Index>(l());
  DenseMatrix jac = DenseMatrix::Zero(nm + nl, nz + nl);
  if (nm > 0) jac.topLeftCorner(nm, nz) = eq_matrix_;
  if (nl > 0) {
    jac.bottomLeftCorner(nl, nz) = ineq_gradients(y.head(nz));
    jac.bottomRightCorner(nl, nl).setIdentity();
  }
  return jac;
}

Vector AugmentedProblem::with_slacks(const Vector& z) const {
  if (static_cast<std::size_t>(z.size()) != n()) {
    throw DomainError("with_slacks: point has wrong dimension");
  }
  Vector y(static_cast<Eigen::Index>(dim()));
  y.head(z.size()) = z;
  y.tail(static_cast<Eigen::Index>(l())) = -ineq_values(z);
  return y;
}

bool AugmentedProblem::within_bounds(const Vector& y) const {
  check_dim(y);
  return (y.array() >= lower_.array()).all() && (y.array() <= upper_.array()).all();
}

DenseMatrix jacobian(const AugmentedProblem& a, const Vector& y) { return a.jacobian(y); }

}  // namespace onlp::grg
