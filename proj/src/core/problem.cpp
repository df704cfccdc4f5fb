#include "onlp/problem.hpp"

#include "onlp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onlp {

NlpProblem::NlpProblem(QuadraticForm objective, DenseMatrix eq_matrix, Vector eq_rhs,
                       std::vector<Inequality> ineqs, Vector lower, Vector upper)
    : objective_(std::move(objective)),
      eq_matrix_(std::move(eq_matrix)),
      eq_rhs_(std::move(eq_rhs)),
      ineqs_(std::move(ineqs)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  validate(true);
}

NlpProblem::NlpProblem(TrustedRank, QuadraticForm objective, DenseMatrix eq_matrix, Vector eq_rhs,
                       std::vector<Inequality> ineqs, Vector lower, Vector upper)
    : objective_(std::move(objective)),
      eq_matrix_(std::move(eq_matrix)),
      eq_rhs_(std::move(eq_rhs)),
      ineqs_(std::move(ineqs)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  validate(false);
}

void NlpProblem::validate(bool check_rank) const {
  const std::size_t nv = n();
  if (eq_matrix_.rows() > 0 && static_cast<std::size_t>(eq_matrix_.cols()) != nv) {
    throw DomainError("equality matrix has " + std::to_string(eq_matrix_.cols()) +
                      " columns, expected " + std::to_string(nv));
  }
  if (eq_matrix_.rows() != eq_rhs_.size()) {
    throw DomainError("equality rhs length does not match equality rows");
  }
  if (m() > nv) throw DomainError("more equality constraints than variables");
  if (!eq_matrix_.allFinite() || !eq_rhs_.allFinite()) {
    throw DomainError("equality data must be finite");
  }
  for (std::size_t j = 0; j < ineqs_.size(); ++j) {
    if (ineqs_[j].form.dim() != nv) {
      throw DomainError("inequality " + std::to_string(j) + " has wrong dimension");
    }
    if (!std::isfinite(ineqs_[j].rhs)) {
      throw DomainError("inequality " + std::to_string(j) + " has non-finite rhs");
    }
  }
  if (static_cast<std::size_t>(lower_.size()) != nv ||
      static_cast<std::size_t>(upper_.size()) != nv) {
    throw DomainError("bound vectors must have length n");
  }
  for (std::size_t k = 0; k < nv; ++k) {
    if (std::isnan(lower_[k]) || std::isnan(upper_[k]) || lower_[k] > upper_[k] ||
        lower_[k] == INFINITY || upper_[k] == -INFINITY) {
      throw DomainError("invalid bounds at variable " + std::to_string(k));
    }
  }
  if (check_rank && m() > 0) {
    const std::size_t rank = numerical_rank(eq_matrix_, kRankTolerance);
    if (rank < m()) {
      throw DomainError("equality matrix is rank deficient (rank " + std::to_string(rank) +
                        " < m = " + std::to_string(m()) + ")");
    }
  }
}

double NlpProblem::max_violation(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != n()) {
    throw DomainError("point has wrong dimension");
  }
  double worst = 0.0;
  if (m() > 0) worst = (eq_matrix_ * x - eq_rhs_).cwiseAbs().maxCoeff();
  for (const auto& ineq : ineqs_) worst = std::max(worst, ineq.form.value(x) - ineq.rhs);
  for (std::size_t k = 0; k < n(); ++k) {
    worst = std::max({worst, lower_[k] - x[k], x[k] - upper_[k]});
  }
  return worst;
}

}  // namespace onlp
