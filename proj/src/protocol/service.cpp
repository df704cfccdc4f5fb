#include "onlp/protocol.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace onlp::protocol {

namespace {

/// Box center, or the projection of 0 when a side is unbounded.
Vector box_guess(const NlpProblem& p) {
  Vector z(static_cast<Eigen::Index>(p.n()));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double lo = p.lower()[i];
    const double hi = p.upper()[i];
    z[i] = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : std::clamp(0.0, lo, hi);
  }
  return z;
}

std::optional<Vector> start_point(const grg::AugmentedProblem& a, const ProblemDocument& doc,
                                  const Vector& guess, const grg::SolverConfig& cfg) {
  if (doc.start_point) {
    const Vector y = a.with_slacks(guess);
    if (a.within_bounds(y) && a.residual(y).lpNorm<1>() <= cfg.eps_feas) return y;
    // Rounding in the masked coefficients leaves a good start slightly off
    // the constraints; project it back.
  }
  return grg::phase_one(a, guess, cfg);
}

}  // namespace

SolutionDocument solve_document(const ProblemDocument& doc, const grg::SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  SolutionDocument out;
  try {
    const Vector guess = doc.start_point ? *doc.start_point : box_guess(doc.problem);
    const grg::AugmentedProblem a =
        grg::augment(grg::normalize_inequalities(doc.problem, guess));
    const std::optional<Vector> y0 = start_point(a, doc, guess, cfg);
    if (!y0) {
      out.reason = "no feasible start point";
    } else {
      const grg::SolverRun run = grg::grg_solve(a, *y0, cfg);
      out.termination = run.termination;
      out.z_star = a.strip_slacks(run.y_star);
      out.objective_value = run.objective_value;
      out.iterations = run.outer_iterations;
      if (run.termination == grg::Termination::DirectionBelowEps ||
          run.termination == grg::Termination::LineSearchStalled) {
        out.status = SolveStatus::Solved;
      } else {
        out.reason = "solver stopped with " + grg::to_string(run.termination);
      }
    }
  } catch (const Error& e) {
    out.status = SolveStatus::Failed;
    out.reason = e.what();
  }
  out.solver_wall_time_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  spdlog::debug("solve n={} status={} iterations={} {:.1f} ms", doc.problem.n(),
                to_string(out.status), out.iterations, out.solver_wall_time_ms);
  return out;
}

}  // namespace onlp::protocol
