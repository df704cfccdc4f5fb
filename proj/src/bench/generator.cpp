#include "onlp/generator.hpp"

#include "onlp/errors.hpp"
#include "onlp/random.hpp"

#include <cmath>
#include <string>

namespace onlp::bench {

void GeneratorSpec::validate() const {
  if (m > n) throw DomainError("generator: m must not exceed n");
  if (m + l > n) throw DomainError("generator: m + l must not exceed n");
  if (!(bound_half_width > 0.0) || !std::isfinite(bound_half_width)) {
    throw DomainError("generator: bound half width must be positive and finite");
  }
}

GeneratedProblem generate_feasible(const GeneratorSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto m = static_cast<Eigen::Index>(spec.m);
  const double w = spec.bound_half_width;
  Rng root(spec.seed);
  Rng point_rng = root.split();
  Rng objective_rng = root.split();
  Rng eq_rng = root.split();
  Rng ineq_rng = root.split();

  Vector x0(n);
  for (Eigen::Index i = 0; i < n; ++i) x0[i] = point_rng.uniform(-0.5 * w, 0.5 * w);

  const Eigen::Index k = (n + 3) / 4;
  Eigen::MatrixXd a(k, n);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = objective_rng.normal();
  }
  DenseMatrix q = (a.transpose() * a) / static_cast<double>(std::max<Eigen::Index>(n, 1));
  for (Eigen::Index i = 0; i < n; ++i) q(i, i) += objective_rng.uniform(0.5, 1.5);
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = 0.5 * w * objective_rng.normal();
  QuadraticForm objective = QuadraticForm::dense(std::move(q), std::move(c));

  const double row_scale = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)));
  DenseMatrix g(m, n);
  for (int attempt = 0;; ++attempt) {
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index col = 0; col < n; ++col) g(r, col) = row_scale * eq_rng.normal();
    }
    if (m == 0 || numerical_rank(g, kRankTolerance) == spec.m) break;
    if (attempt == 100) throw DomainError("generator: could not draw a full-rank equality matrix");
  }
  Vector b = g * x0;

  std::vector<Inequality> ineqs;
  ineqs.reserve(spec.l);
  const double quad_scale = 1.0 / static_cast<double>(std::max<Eigen::Index>(n, 1));
  for (std::size_t j = 0; j < spec.l; ++j) {
    Vector diag(n);
    Vector lin(n);
    for (Eigen::Index i = 0; i < n; ++i) diag[i] = quad_scale * ineq_rng.uniform01();
    for (Eigen::Index i = 0; i < n; ++i) lin[i] = row_scale * ineq_rng.normal();
    QuadraticForm form = QuadraticForm::diagonal(std::move(diag), std::move(lin));
    const double margin = ineq_rng.uniform(0.1, 1.0);
    const double rhs = form.value(x0) + margin;
    ineqs.push_back({std::move(form), rhs});
  }

  Vector lower = Vector::Constant(n, -w);
  Vector upper = Vector::Constant(n, w);
  // The rank was checked above.
  NlpProblem problem(NlpProblem::TrustedRank{}, std::move(objective), std::move(g), std::move(b),
                     std::move(ineqs), std::move(lower), std::move(upper));
  return {std::move(problem), std::move(x0)};
}

}  // namespace onlp::bench
