#include "onlp/errors.hpp"
#include "onlp/grg.hpp"

namespace onlp::grg {

Vector gradient_descent(const QuadraticForm& f, const Vector& x0, const SolverConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(x0.size()) != f.dim()) {
    throw DomainError("gradient_descent: start point has wrong dimension");
  }
  constexpr double kUnbounded = -1e15;
  const std::size_t limit = cfg.outer_limit(f.dim(), 0);
  Vector x = x0;
  double fx = f.value(x);
  for (std::size_t k = 0; k < limit; ++k) {
    const Vector g = f.gradient(x);
    if (g.size() == 0 || g.lpNorm<Eigen::Infinity>() <= cfg.eps_direction) break;
    const double gg = g.squaredNorm();
    const double curvature = f.curvature(g);
    // f(x - t g) = f(x) - t g^T g + t^2/2 g^T Q g falls without bound in t.
    if (!(curvature > 0.0)) throw DomainError("objective is unbounded below along -grad f");
    double lambda = gg / curvature;
    bool decreased = false;
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h) {
      const Vector step = -lambda * g;
      // Exact change of a quadratic along the step.
      const double change = g.dot(step) + 0.5 * f.curvature(step);
      if (change < 0.0) {
        x += step;
        fx += change;
        decreased = true;
        break;
      }
      lambda *= cfg.halving;
    }
    if (!decreased) break;
    if (fx < kUnbounded) throw DomainError("objective is unbounded below along the descent path");
  }
  return x;
}

}  // namespace onlp::grg
