#pragma once

// Cloud side: slack augmentation and the generalized reduced gradient method.
//
// The augmented problem works on y = (z, s) where s holds one slack per
// inequality:
//
//   minimize f(z)  subject to  G z - b = 0,  h_j(z) + s_j - beta_j = 0,
//                              lower <= z <= upper,  s >= 0.
//
// Every iteration partitions y into m + l basic and n - m nonbasic
// variables, moves the nonbasic ones along the bound-clamped negative reduced
// gradient and restores the constraints by Newton iteration on the basic ones.

#include "onlp/matrix.hpp"
#include "onlp/problem.hpp"
#include "onlp/quadratic.hpp"

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace onlp::grg {

class AugmentedProblem {
 public:
  AugmentedProblem() = default;
  explicit AugmentedProblem(const NlpProblem& p);

  /// Number of original variables z.
  std::size_t n() const noexcept { return objective_.dim(); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(eq_matrix_.rows()); }
  std::size_t l() const noexcept { return ineqs_.size(); }
  /// Length of y = (z, s).
  std::size_t dim() const noexcept { return n() + l(); }
  std::size_t constraint_count() const noexcept { return m() + l(); }

  /// Bounds on y; slack uppers are +infinity.
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  /// Objective over z; slack coefficients are zero.
  const QuadraticForm& objective_form() const noexcept { return objective_; }
  const DenseMatrix& eq_matrix() const noexcept { return eq_matrix_; }
  /// Max absolute row sum of the equality matrix.
  double eq_norm_inf() const noexcept { return eq_norm_inf_; }
  const Vector& eq_rhs() const noexcept { return eq_rhs_; }
  const std::vector<Inequality>& ineqs() const noexcept { return ineqs_; }

  double objective(const Vector& y) const;
  Vector objective_gradient(const Vector& y) const;
  /// d^T (Hessian of f) d for a direction over y.
  double objective_curvature(const Vector& d) const;
  /// f(y + delta) - f(y), evaluated without cancellation of f itself.
  double objective_change(const Vector& y, const Vector& delta) const;

  /// d^T (Hessian of e_i) d for every constraint row; zero on equality rows.
  Vector constraint_curvatures(const Vector& d) const;
  /// Constraint values e(y), length m + l.
  Vector residual(const Vector& y) const;
  /// (m + l) x (n + l) Jacobian of e at y.
  DenseMatrix jacobian(const Vector& y) const;
  /// h_j(z) - beta_j for every inequality row.
  Vector ineq_values(const Vector& z) const;
  /// l x n matrix whose rows are the gradients of h_j at z.
  DenseMatrix ineq_gradients(const Vector& z) const;

  /// y = (z, s) with s_j = beta_j - h_j(z), so the inequality rows of e vanish.
  Vector with_slacks(const Vector& z) const;
  Vector strip_slacks(const Vector& y) const { return y.head(static_cast<Eigen::Index>(n())); }

  /// True when lower <= y <= upper holds exactly.
  bool within_bounds(const Vector& y) const;

 private:
  void check_dim(const Vector& y) const;

  QuadraticForm objective_;
  DenseMatrix eq_matrix_;
  double eq_norm_inf_ = 0.0;
  Vector eq_rhs_;
  std::vector<Inequality> ineqs_;
  // Separable inequality rows stacked as h(z) = 1/2 D (z .* z) + L z + offset,
  // so they are evaluated with two matrix-vector products.
  bool stacked_ = false;
  DenseMatrix ineq_diag_;
  DenseMatrix ineq_lin_;
  Vector ineq_offset_;
  Vector lower_;
  Vector upper_;
};

/// Divides every inequality row by the Euclidean norm of its gradient at z;
/// rows whose gradient vanishes there are left alone. Slacks enter the
/// method with unit coefficients, so without this a positive rescaling of a
/// row rescales its slack and changes the iterates.
NlpProblem normalize_inequalities(const NlpProblem& p, const Vector& z);

AugmentedProblem augment(const NlpProblem& p);
AugmentedProblem augment(const EncryptedProblem& p);

DenseMatrix jacobian(const AugmentedProblem& a, const Vector& y);

struct BasisPartition {
  std::vector<std::size_t> basic;
  std::vector<std::size_t> nonbasic;
};

/// Pivot tolerance for the basic Jacobian block.
inline constexpr double kBasisPivotTolerance = 1e-10;

/// Chooses m + l basic columns. Every slack strictly above zero is basic for
/// its own row. The remaining rows (equalities and inequalities whose slack is
/// zero) are covered by a column-pivoted Householder factorization of the
/// row-equilibrated Jacobian, with pivot candidates ranked by their remaining
/// column norm weighted by the distance of the variable to its nearest bound,
/// so interior variables are preferred. Throws BasisFailure when the Jacobian
/// is rank deficient.
BasisPartition select_basis(const AugmentedProblem& a, const Vector& y);

/// r^T = grad_N f - grad_B f^T (de/dy_B)^-1 (de/dy_N), through linear solves.
Vector reduced_gradient(const AugmentedProblem& a, const Vector& y, const BasisPartition& part);

/// d_i = -r_i, except d_i = 0 when the variable sits at its lower bound and
/// -r_i < 0, or at its upper bound and -r_i > 0.
Vector nonbasic_direction(const Vector& r, const Vector& y, const BasisPartition& part,
                          const Vector& lower, const Vector& upper);

/// d_B = -(de/dy_B)^-1 (de/dy_N) d_N.
Vector basic_direction(const Vector& d_N, const AugmentedProblem& a, const Vector& y,
                       const BasisPartition& part);

/// Assembles the full direction over y from its basic and nonbasic parts.
Vector assemble(const BasisPartition& part, const Vector& d_B, const Vector& d_N);

/// How the nonbasic direction is formed from the reduced gradient.
enum class DirectionRule {
  /// d_N = -r with bound clamps.
  SteepestDescent,
  /// Preconditioned Polak-Ribiere directions over the free nonbasic
  /// variables. The preconditioner is the inverse of Z^T Z for the null-space
  /// basis Z = [-B^-1 N; I], which turns -r into the projection of -grad f
  /// onto the tangent space. Restarts whenever the free set or the basis
  /// changes or the result is not a descent direction.
  ConjugateGradient,
};

struct SolverConfig {
  double eps_direction = 1e-6;  // stop when ||d_N||_1 <= eps_direction (steepest d_N)
  double eps_feas = 1e-8;       // restoration target ||e||_1
  double lambda_init = 1.0;     // first trial step when the tangent curvature is not positive
  double halving = 0.5;
  std::size_t max_outer = 0;    // 0 selects 10 * (n + l)
  std::size_t max_newton = 50;
  std::size_t max_halvings = 40;
  DirectionRule direction = DirectionRule::ConjugateGradient;
  /// Reuse the factorization of the basic block across Newton iterations and
  /// outer iterations, refining each solve against the current block and
  /// refactorizing only when refinement stops converging. When false every
  /// Newton step refactorizes.
  bool chord_newton = true;
  /// Keep per-iteration diagnostics in SolverRun::trace.
  bool record_trace = false;

  void validate() const;
  std::size_t outer_limit(std::size_t n, std::size_t l) const {
    return max_outer > 0 ? max_outer : 10 * (n + l);
  }
};

struct RestoreResult {
  Vector y_basic;
  std::size_t iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;  // ||e||_1 at the returned point
};

/// Solves e(y_B, y_N) = 0 for y_B with y_N fixed by Newton iteration
/// y_B <- y_B - (de/dy_B)^-1 e. Non-convergence within max_newton is reported
/// through converged = false; a singular basic block throws BasisFailure.
RestoreResult newton_restore(const AugmentedProblem& a, const Vector& y_B_init,
                             const Vector& y_N_fixed, const BasisPartition& part,
                             const SolverConfig& cfg);

enum class Termination {
  DirectionBelowEps,
  MaxIterations,
  RestorationFailed,
  BasisFailure,
  /// No step length within max_halvings produced a strict decrease, or
  /// several steps in a row only did so after most of them. The point is as
  /// good as restoration noise allows; callers judge it by KKT checks.
  LineSearchStalled,
};

std::string to_string(Termination t);
std::string to_string(DirectionRule r);
std::optional<DirectionRule> direction_from_string(const std::string& s);
std::optional<Termination> termination_from_string(const std::string& s);

/// Diagnostics of one accepted iterate.
struct IterateRecord {
  double objective = 0.0;
  double objective_change = 0.0;  // f(y_{k+1}) - f(y_k), < 0
  double feasibility = 0.0;       // ||e(y_{k+1})||_1
  double direction_residual = 0.0;  // ||J(y_k) d||_inf
  double directional_derivative = 0.0;  // grad f(y_k)^T d
  double step = 0.0;
  bool within_bounds = true;
  std::size_t newton_iterations = 0;
};

struct SolverRun {
  Vector y_star;
  double objective_value = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t newton_iterations_total = 0;
  std::size_t factorizations = 0;
  Termination termination = Termination::MaxIterations;
  std::chrono::duration<double> wall_time{0.0};
  double final_direction_norm = 0.0;  // ||d_N||_1 at the last evaluated point
  std::vector<IterateRecord> trace;
};

/// Generalized reduced gradient loop from a feasible start y0
/// (||e(y0)||_1 <= eps_feas and within bounds; otherwise DomainError).
/// Budget exhaustion and numerical failures are reported in termination.
SolverRun grg_solve(const AugmentedProblem& a, const Vector& y0, const SolverConfig& cfg = {});

/// Newton projection of a guess z onto e = 0 with the nonbasic variables
/// held fixed, followed by a bound check. Returns y on success.
std::optional<Vector> phase_one(const AugmentedProblem& a, const Vector& z_guess,
                                const SolverConfig& cfg = {});

/// Steepest descent with exact line search for an unconstrained quadratic:
/// lambda = g^T g / g^T Q g, halved while f does not decrease. Stops when
/// ||grad||_inf <= eps_direction or after max_outer iterations. Throws
/// DomainError when g^T Q g <= 0 (f unbounded below along -g) or f falls
/// below -1e15.
Vector gradient_descent(const QuadraticForm& f, const Vector& x0, const SolverConfig& cfg = {});

}  // namespace onlp::grg
