#pragma once

// Shared fixtures and hand-rolled generators for the test suites.

#include "onlp/matrix.hpp"
#include "onlp/problem.hpp"
#include "onlp/quadratic.hpp"
#include "onlp/random.hpp"

#include <cmath>
#include <functional>

namespace onlp::test {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline DenseMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  DenseMatrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline DenseMatrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  DenseMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

/// Dense or diagonal form with random coefficients.
inline QuadraticForm random_form(Rng& rng, Eigen::Index n, bool diagonal) {
  const Vector lin = random_vector(rng, n);
  const double d = rng.uniform(-1.0, 1.0);
  if (diagonal) return QuadraticForm::diagonal(random_vector(rng, n, 0.0, 2.0), lin, d);
  return QuadraticForm::dense(random_matrix(rng, n, n), lin, d);
}

/// min x1^2 + x2^2  s.t.  x1 + x2 = 1,  x1^2 <= 1,  -10 <= x <= 10.
inline NlpProblem toy_problem() {
  std::vector<Inequality> ineqs;
  ineqs.push_back({QuadraticForm::diagonal(vec({2.0, 0.0}), vec({0.0, 0.0})), 1.0});
  return NlpProblem(QuadraticForm::diagonal(vec({2.0, 2.0}), vec({0.0, 0.0})), mat({{1.0, 1.0}}),
                    vec({1.0}), std::move(ineqs), vec({-10.0, -10.0}), vec({10.0, 10.0}));
}

/// Central differences with step h.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

}  // namespace onlp::test
