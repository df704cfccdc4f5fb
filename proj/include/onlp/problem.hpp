#pragma once

#include "onlp/matrix.hpp"
#include "onlp/quadratic.hpp"

#include <cstddef>
#include <vector>

namespace onlp {

/// h(x) <= rhs.
struct Inequality {
  QuadraticForm form;
  double rhs = 0.0;
};

/// Tolerance factor for the full-row-rank check on the equality matrix,
/// relative to ||G||_inf.
inline constexpr double kRankTolerance = 1e-10;

/// minimize f(x) subject to G x = b, h_j(x) <= beta_j, lower <= x <= upper.
///
/// Immutable once built. The constructor validates dimensions, finiteness,
/// lower <= upper, m <= n and full row rank of G.
class NlpProblem {
 public:
  NlpProblem() = default;
  NlpProblem(QuadraticForm objective, DenseMatrix eq_matrix, Vector eq_rhs,
             std::vector<Inequality> ineqs, Vector lower, Vector upper);

  /// Skips the O(m^2 n) rank estimate. For callers that derive the problem
  /// from an already validated one through a rank-preserving map.
  struct TrustedRank {};
  NlpProblem(TrustedRank, QuadraticForm objective, DenseMatrix eq_matrix, Vector eq_rhs,
             std::vector<Inequality> ineqs, Vector lower, Vector upper);

  std::size_t n() const noexcept { return objective_.dim(); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(eq_matrix_.rows()); }
  std::size_t l() const noexcept { return ineqs_.size(); }

  const QuadraticForm& objective() const noexcept { return objective_; }
  const DenseMatrix& eq_matrix() const noexcept { return eq_matrix_; }
  const Vector& eq_rhs() const noexcept { return eq_rhs_; }
  const std::vector<Inequality>& ineqs() const noexcept { return ineqs_; }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  /// Largest violation over equalities |Gx - b|, inequalities
  /// max(h_j(x) - beta_j, 0) and bounds.
  double max_violation(const Vector& x) const;
  bool is_feasible(const Vector& x, double tol) const { return max_violation(x) <= tol; }

 private:
  void validate(bool check_rank) const;

  QuadraticForm objective_;
  DenseMatrix eq_matrix_;
  Vector eq_rhs_;
  std::vector<Inequality> ineqs_;
  Vector lower_;
  Vector upper_;
};

/// The masked problem handed to the solver. Same shape as NlpProblem,
/// expressed in the masked variable z; kept as a distinct type so that
/// client-only code paths cannot be handed a masked instance by accident.
class EncryptedProblem {
 public:
  EncryptedProblem() = default;
  explicit EncryptedProblem(NlpProblem masked) : problem_(std::move(masked)) {}
  const NlpProblem& problem() const noexcept { return problem_; }

 private:
  NlpProblem problem_;
};

}  // namespace onlp
