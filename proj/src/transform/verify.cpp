#include "onlp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace onlp::transform {

namespace {

// Least squares min ||A mu + g|| through the normal equations, followed by
// one correction step on the true residual. A tiny diagonal shift keeps
// rank-deficient active sets solvable.
Vector least_squares_multipliers(const Eigen::MatrixXd& a, const Vector& g) {
  const Eigen::Index k = a.cols();
  if (k == 0) return Vector(0);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(k, k);
  normal.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  const double trace = normal.diagonal().sum();
  const double shift = 1e-14 * std::max(trace / static_cast<double>(k), 1e-300);
  normal.diagonal().array() += shift;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal.selfadjointView<Eigen::Lower>());
  Vector mu = ldlt.solve(Vector(-(a.transpose() * g)));
  for (int pass = 0; pass < 2; ++pass) {
    const Vector res = a * mu + g;
    mu -= ldlt.solve(Vector(a.transpose() * res));
  }
  return mu;
}

}  // namespace

VerificationReport verify_kkt(const NlpProblem& p, const Vector& x, double tol) {
  VerificationReport report;
  const double inf = std::numeric_limits<double>::infinity();
  if (static_cast<std::size_t>(x.size()) != p.n() || !x.allFinite() || !(tol > 0.0)) {
    report.feasibility_residual = inf;
    report.stationarity_residual = inf;
    report.complementarity_residual = inf;
    report.min_ineq_multiplier = -inf;
    return report;
  }
  const std::size_t n = p.n();
  const std::size_t m = p.m();

  report.feasibility_residual = p.max_violation(x);
  const Vector grad = p.objective().gradient(x);
  const double grad_norm = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;

  // Active inequalities: within tol of the boundary (or violated).
  std::vector<std::size_t> active;
  std::vector<double> ineq_slack;
  for (std::size_t j = 0; j < p.l(); ++j) {
    const double slack = p.ineqs()[j].rhs - p.ineqs()[j].form.value(x);
    if (slack <= tol) {
      active.push_back(j);
      ineq_slack.push_back(slack);
    }
  }

  enum class BoundState { kFree, kLower, kUpper, kFixed };
  std::vector<BoundState> bound(n, BoundState::kFree);
  std::vector<Eigen::Index> free_rows;
  for (std::size_t k = 0; k < n; ++k) {
    const bool at_lo = x[k] - p.lower()[k] <= tol;
    const bool at_up = p.upper()[k] - x[k] <= tol;
    if (at_lo && at_up) {
      bound[k] = BoundState::kFixed;
    } else if (at_lo) {
      bound[k] = BoundState::kLower;
    } else if (at_up) {
      bound[k] = BoundState::kUpper;
    } else {
      free_rows.push_back(static_cast<Eigen::Index>(k));
    }
  }

  // Columns: equality normals then active inequality gradients. A bound
  // multiplier only enters its own row, so rows of variables at a bound are
  // left out of the least-squares fit and their multipliers are read off
  // the remaining residual afterwards.
  const Eigen::Index cols = static_cast<Eigen::Index>(m + active.size());
  Eigen::MatrixXd full(static_cast<Eigen::Index>(n), cols);
  if (m > 0) full.leftCols(static_cast<Eigen::Index>(m)) = p.eq_matrix().transpose();
  for (std::size_t a = 0; a < active.size(); ++a) {
    full.col(static_cast<Eigen::Index>(m + a)) = p.ineqs()[active[a]].form.gradient(x);
  }
  Eigen::MatrixXd reduced(static_cast<Eigen::Index>(free_rows.size()), cols);
  Vector reduced_grad(static_cast<Eigen::Index>(free_rows.size()));
  for (std::size_t i = 0; i < free_rows.size(); ++i) {
    reduced.row(static_cast<Eigen::Index>(i)) = full.row(free_rows[i]);
    reduced_grad[static_cast<Eigen::Index>(i)] = grad[free_rows[i]];
  }
  const Vector mult = least_squares_multipliers(reduced, reduced_grad);
  const Vector residual = cols > 0 ? Vector(full * mult + grad) : grad;

  double stationarity = 0.0;
  for (Eigen::Index row : free_rows) stationarity = std::max(stationarity, std::abs(residual[row]));

  double min_mult = inf;
  double max_mult = 0.0;
  double complementarity = 0.0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const double mu = mult[static_cast<Eigen::Index>(m + a)];
    min_mult = std::min(min_mult, mu);
    max_mult = std::max(max_mult, std::abs(mu));
    complementarity = std::max(complementarity, std::abs(mu * ineq_slack[a]));
  }
  for (std::size_t k = 0; k < n; ++k) {
    // grad_k + (A mu)_k - nu_lo + nu_up = 0.
    double nu = 0.0;
    double gap = 0.0;
    switch (bound[k]) {
      case BoundState::kFree:
      case BoundState::kFixed:
        continue;
      case BoundState::kLower:
        nu = residual[static_cast<Eigen::Index>(k)];
        gap = x[k] - p.lower()[k];
        break;
      case BoundState::kUpper:
        nu = -residual[static_cast<Eigen::Index>(k)];
        gap = p.upper()[k] - x[k];
        break;
    }
    min_mult = std::min(min_mult, nu);
    max_mult = std::max(max_mult, std::abs(nu));
    complementarity = std::max(complementarity, std::abs(nu * gap));
  }
  if (min_mult == inf) min_mult = 0.0;

  report.stationarity_residual = stationarity;
  report.min_ineq_multiplier = min_mult;
  report.complementarity_residual = complementarity;
  report.accepted = report.feasibility_residual <= tol && stationarity <= tol * (1.0 + grad_norm) &&
                    complementarity <= tol * (1.0 + max_mult) && min_mult >= -tol;
  return report;
}

}  // namespace onlp::transform
