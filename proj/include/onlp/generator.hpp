#pragma once

#include "onlp/problem.hpp"

#include <cstddef>
#include <cstdint>

namespace onlp::bench {

struct GeneratorSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  std::uint64_t seed = 0;
  double bound_half_width = 10.0;

  /// m <= n, m + l <= n, positive finite half width; DomainError otherwise.
  void validate() const;
};

struct GeneratedProblem {
  NlpProblem problem;
  /// Strictly feasible point: equalities hold, every inequality has slack
  /// of at least 0.1 and the point is inside the box.
  Vector x0;
};

/// Random feasible instance.
///
/// Objective: 1/2 x^T Q x + c^T x with Q = D + A^T A / n, D diagonal in
/// (0.5, 1.5) and A a ceil(n/4) x n standard normal matrix; c normal with
/// standard deviation half_width / 2.
/// Equalities: standard normal rows scaled by 1/sqrt(n), rhs = G x0; the
/// matrix is redrawn until it has full row rank.
/// Inequalities: separable convex quadratics with Q_jj uniform in (0, 1/n)
/// and linear part normal / sqrt(n); rhs = h_j(x0) + margin, margin uniform
/// in (0.1, 1).
/// Bounds: [-half_width, half_width]; x0 uniform in the middle half of the box.
GeneratedProblem generate_feasible(const GeneratorSpec& spec);

}  // namespace onlp::bench
