#include "basis_factor.hpp"
#include "onlp/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace onlp::grg {

void SolverConfig::validate() const {
  if (!(eps_direction > 0.0) || !(eps_feas > 0.0)) {
    throw DomainError("solver tolerances must be positive");
  }
  if (!(lambda_init > 0.0) || !std::isfinite(lambda_init)) {
    throw DomainError("lambda_init must be positive and finite");
  }
  if (!(halving > 0.0 && halving < 1.0)) throw DomainError("halving factor must lie in (0, 1)");
  if (max_newton == 0) throw DomainError("max_newton must be at least 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::DirectionBelowEps: return "DirectionBelowEps";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::RestorationFailed: return "RestorationFailed";
    case Termination::BasisFailure: return "BasisFailure";
    case Termination::LineSearchStalled: return "LineSearchStalled";
  }
  return "unknown";
}

std::optional<Termination> termination_from_string(const std::string& s) {
  for (auto t : {Termination::DirectionBelowEps, Termination::MaxIterations,
                 Termination::RestorationFailed, Termination::BasisFailure,
                 Termination::LineSearchStalled}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string to_string(DirectionRule r) {
  return r == DirectionRule::SteepestDescent ? "steepest" : "conjugate";
}

std::optional<DirectionRule> direction_from_string(const std::string& s) {
  if (s == "steepest") return DirectionRule::SteepestDescent;
  if (s == "conjugate") return DirectionRule::ConjugateGradient;
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;
using detail::BasisFactor;
using detail::JacobianOp;

double interior_weight(double y, double lo, double hi) {
  const double dist = std::max(0.0, std::min(y - lo, hi - y));
  return (std::isinf(dist) ? 1.0 : dist / (1.0 + dist)) + 1e-3;
}

/// Largest step along d before variable i leaves its bounds.
double bound_ratio(double y, double d, double lo, double hi) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (d < 0.0 && std::isfinite(lo)) return std::max(0.0, (y - lo) / -d);
  if (d > 0.0 && std::isfinite(hi)) return std::max(0.0, (hi - y) / d);
  return inf;
}

struct Blocking {
  enum class Kind { None, Nonbasic, Basic } kind = Kind::None;
  std::size_t position = 0;  // index into part.nonbasic or part.basic
  double bound = 0.0;
};

/// Metric that the Euclidean norm on y induces on the free nonbasic
/// variables. With W = B^-1 N_F the null-space basis is Z = [-W; I] and
///   (Z^T Z)^-1 = I - N_F^T (B B^T + N_F N_F^T)^-1 N_F,
/// so preconditioning the reduced gradient with it yields the projection of
/// the gradient onto the tangent space. It is built at one point and reused
/// while the free set only shrinks: restricting an SPD operator to a subset
/// of coordinates keeps it SPD, so stale data only slows convergence.
class ReducedMetric {
 public:
  void build(const JacobianOp& jac, const BasisPartition& part, const std::vector<bool>& held,
             std::size_t dim) {
    column_of_.assign(dim, -1);
    std::vector<std::size_t> free_vars;
    for (std::size_t i = 0; i < part.nonbasic.size(); ++i) {
      if (held[i]) continue;
      column_of_[part.nonbasic[i]] = static_cast<Eigen::Index>(free_vars.size());
      free_vars.push_back(part.nonbasic[i]);
    }
    const auto k = static_cast<Eigen::Index>(part.basic.size());
    nf_ = jac.columns(free_vars);
    valid_ = true;
    if (k == 0) return;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(jac.columns(part.basic));
    if (nf_.cols() > 0) gram.selfadjointView<Eigen::Lower>().rankUpdate(nf_);
    chol_.compute(gram);
    valid_ = chol_.info() == Eigen::Success;
  }

  bool valid() const noexcept { return valid_; }
  void invalidate() noexcept { valid_ = false; }

  /// True when every free nonbasic variable was free when the metric was built.
  bool covers(const BasisPartition& part, const std::vector<bool>& held) const {
    for (std::size_t i = 0; i < part.nonbasic.size(); ++i) {
      if (!held[i] && column_of_[part.nonbasic[i]] < 0) return false;
    }
    return true;
  }

  /// (Z^T Z)^-1 s over the free nonbasic positions; held positions stay zero.
  Vector apply(const Vector& s, const BasisPartition& part, const std::vector<bool>& held) const {
    if (nf_.rows() == 0) return s;
    Vector padded = Vector::Zero(nf_.cols());
    for (std::size_t i = 0; i < part.nonbasic.size(); ++i) {
      if (!held[i]) padded[column_of_[part.nonbasic[i]]] = s[static_cast<Eigen::Index>(i)];
    }
    const Vector x = chol_.solve(nf_ * padded);
    Vector out = s;
    for (std::size_t i = 0; i < part.nonbasic.size(); ++i) {
      if (held[i]) continue;
      out[static_cast<Eigen::Index>(i)] -= nf_.col(column_of_[part.nonbasic[i]]).dot(x);
    }
    return out;
  }

 private:
  std::vector<Eigen::Index> column_of_;
  Eigen::MatrixXd nf_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  bool valid_ = false;
};

class Engine {
 public:
  Engine(const AugmentedProblem& a, const SolverConfig& cfg) : a_(a), cfg_(cfg) {}

  SolverRun run(const Vector& y0);

 private:
  bool reselect(const Vector& y);
  std::size_t total_factorizations() const { return retired_factorizations_ + factor_.factorizations(); }

  /// Position in part_.nonbasic of the column entering for basic position p.
  std::optional<std::size_t> entering_column(std::size_t p, const JacobianOp& jac,
                                             const DenseMatrix& B, const Vector& y);

  const AugmentedProblem& a_;
  const SolverConfig& cfg_;
  BasisPartition part_;
  BasisFactor factor_;
  ReducedMetric metric_;
  std::size_t retired_factorizations_ = 0;
};

bool Engine::reselect(const Vector& y) {
  retired_factorizations_ += factor_.factorizations();
  factor_ = BasisFactor();
  metric_.invalidate();
  try {
    part_ = select_basis(a_, y);
    factor_.refactor(JacobianOp(a_, y).columns(part_.basic));
  } catch (const BasisFailure&) {
    return false;
  }
  return true;
}

std::optional<std::size_t> Engine::entering_column(std::size_t p, const JacobianOp& jac,
                                                   const DenseMatrix& B, const Vector& y) {
  Vector unit = Vector::Zero(static_cast<Eigen::Index>(part_.basic.size()));
  unit[static_cast<Eigen::Index>(p)] = 1.0;
  const Vector v = factor_.solve_transpose(B, unit, detail::kLooseSolve);
  const Vector alpha = detail::gather(jac.transpose_times(v), part_.nonbasic);
  const double largest = alpha.size() > 0 ? alpha.cwiseAbs().maxCoeff() : 0.0;
  if (!(largest > 0.0)) return std::nullopt;
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t q = 0; q < part_.nonbasic.size(); ++q) {
    const double mag = std::abs(alpha[static_cast<Eigen::Index>(q)]);
    if (mag <= 1e-6 * largest) continue;
    const auto idx = static_cast<Eigen::Index>(part_.nonbasic[q]);
    const double score = mag * interior_weight(y[idx], a_.lower()[idx], a_.upper()[idx]);
    if (score > best_score) {
      best_score = score;
      best = q;
    }
  }
  return best;
}

SolverRun Engine::run(const Vector& y0) {
  const auto started = Clock::now();
  SolverRun out;
  Vector y = y0;
  const Vector& lo = a_.lower();
  const Vector& hi = a_.upper();
  const std::size_t limit = cfg_.outer_limit(a_.n(), a_.l());
  const std::size_t degenerate_limit = a_.dim() + 1;
  const bool conjugate = cfg_.direction == DirectionRule::ConjugateGradient;

  std::size_t basis_failures = 0;
  std::size_t degenerate_pivots = 0;
  constexpr std::size_t kNoisyHalvings = 20;
  constexpr std::size_t kNoisyRun = 3;
  std::size_t noisy_steps = 0;
  bool stall_reselected = false;
  bool cg_restart = true;
  Vector prev_steep;
  Vector prev_precond;
  Vector prev_d;
  std::vector<bool> prev_held;
  std::size_t metric_changes = 0;

  auto fail_basis = [&](const Vector& at) {
    ++basis_failures;
    cg_restart = true;
    return basis_failures <= 2 && reselect(at);
  };

  if (!reselect(y)) {
    out.termination = Termination::BasisFailure;
  } else {
    // The objective gradient is updated with Q * delta after each step and
    // recomputed from scratch now and then to shed rounding drift.
    constexpr std::size_t kGradientRefresh = 50;
    Vector grad;
    double f_y = 0.0;
    std::size_t grad_age = kGradientRefresh;
    const auto nz = static_cast<Eigen::Index>(a_.n());
    for (;;) {
      if (grad_age >= kGradientRefresh) {
        grad = a_.objective_gradient(y);
        f_y = a_.objective(y);
        grad_age = 0;
      }
      const JacobianOp jac(a_, y);
      const DenseMatrix B = jac.columns(part_.basic);

      Vector r;
      Vector u;
      try {
        u = factor_.solve_transpose(B, detail::gather(grad, part_.basic));
        r = detail::gather(grad, part_.nonbasic) - detail::gather(jac.transpose_times(u), part_.nonbasic);
      } catch (const BasisFailure&) {
        if (fail_basis(y)) continue;
        out.termination = Termination::BasisFailure;
        break;
      }

      const Vector d_sd = nonbasic_direction(r, y, part_, lo, hi);
      out.final_direction_norm = d_sd.lpNorm<1>();
      if (out.final_direction_norm <= cfg_.eps_direction) {
        out.termination = Termination::DirectionBelowEps;
        break;
      }
      if (out.outer_iterations >= limit) {
        out.termination = Termination::MaxIterations;
        break;
      }

      // Nonbasic variables on a bound are held there until the free ones
      // have nearly converged relative to the pull off the bound; releasing
      // them immediately makes the active set zigzag.
      std::vector<bool> held(part_.nonbasic.size(), false);
      double free_sq = 0.0;
      double leave_sq = 0.0;
      for (std::size_t i = 0; i < part_.nonbasic.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(part_.nonbasic[i]);
        const double di = d_sd[static_cast<Eigen::Index>(i)];
        if (y[idx] <= lo[idx] || y[idx] >= hi[idx]) {
          held[i] = true;
          leave_sq += di * di;
        } else {
          free_sq += di * di;
        }
      }
      const bool release = free_sq <= 0.25 * leave_sq;
      if (release) {
        for (std::size_t i = 0; i < held.size(); ++i) {
          held[i] = held[i] && d_sd[static_cast<Eigen::Index>(i)] == 0.0;
        }
      }
      Vector steep = d_sd;
      for (std::size_t i = 0; i < held.size(); ++i) {
        if (held[i]) steep[static_cast<Eigen::Index>(i)] = 0.0;
      }

      // Zeroes components that would push a variable sitting on a bound out
      // of the box; returns false when what is left is not a descent direction.
      auto clamp_descent = [&](Vector& dn) {
        for (std::size_t i = 0; i < part_.nonbasic.size(); ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          const auto idx = static_cast<Eigen::Index>(part_.nonbasic[i]);
          if (held[i] || (y[idx] <= lo[idx] && dn[ii] < 0.0) || (y[idx] >= hi[idx] && dn[ii] > 0.0)) {
            dn[ii] = 0.0;
          }
        }
        return r.dot(dn) < 0.0;
      };

      Vector precond = steep;
      if (conjugate) {
        if (release || held != prev_held) ++metric_changes;
        if (!metric_.valid() || !metric_.covers(part_, held) ||
            metric_changes > std::max<std::size_t>(8, part_.nonbasic.size() / 20)) {
          metric_.build(jac, part_, held, a_.dim());
          metric_changes = 0;
          cg_restart = true;
        }
        precond = metric_.apply(steep, part_, held);
        if (!clamp_descent(precond)) {
          precond = steep;
          cg_restart = true;
        }
      }
      Vector d_N = precond;
      if (conjugate && !cg_restart && held == prev_held && prev_precond.size() == d_N.size()) {
        const double denom = prev_steep.dot(prev_precond);
        if (denom > 0.0) {
          const double beta = std::max(0.0, steep.dot(precond - prev_precond) / denom);
          d_N += beta * prev_d;
          if (!clamp_descent(d_N)) d_N = precond;
        }
      }

      Vector d;
      try {
        Vector moved = Vector::Zero(static_cast<Eigen::Index>(a_.dim()));
        detail::scatter(moved, part_.nonbasic, d_N);
        const Vector d_B = -factor_.solve(B, jac.times(moved));
        d = assemble(part_, d_B, d_N);
      } catch (const BasisFailure&) {
        if (fail_basis(y)) continue;
        out.termination = Termination::BasisFailure;
        break;
      }
      basis_failures = 0;

      const double slope = grad.dot(d);
      // Second derivative of f along the restored path: the basic variables
      // bend with the constraints, which adds -u^T (d^T H_e d).
      const double curvature = a_.objective_curvature(d) - u.dot(a_.constraint_curvatures(d));
      double lambda = curvature > 0.0 ? -slope / curvature : cfg_.lambda_init;
      if (!(lambda > 0.0) || !std::isfinite(lambda)) lambda = cfg_.lambda_init;

      // Ratio tests: nonbasic exactly, basic on the linear prediction.
      Blocking block;
      for (std::size_t i = 0; i < part_.nonbasic.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(part_.nonbasic[i]);
        const double di = d[idx];
        const double t = bound_ratio(y[idx], di, lo[idx], hi[idx]);
        if (t <= lambda) {
          lambda = t;
          block = {Blocking::Kind::Nonbasic, i, di < 0.0 ? lo[idx] : hi[idx]};
        }
      }
      for (std::size_t i = 0; i < part_.basic.size(); ++i) {
        const auto idx = static_cast<Eigen::Index>(part_.basic[i]);
        const double di = d[idx];
        const double t = bound_ratio(y[idx], di, lo[idx], hi[idx]);
        if (t < lambda) {
          lambda = t;
          block = {Blocking::Kind::Basic, i, di < 0.0 ? lo[idx] : hi[idx]};
        }
      }

      // A basic variable already on its bound blocks any move: pivot it out
      // without stepping.
      if (block.kind == Blocking::Kind::Basic && lambda <= 0.0) {
        const auto q = entering_column(block.position, jac, B, y);
        if (!q || ++degenerate_pivots > degenerate_limit ||
            !factor_.replace_column(block.position, jac.column(part_.nonbasic[*q]))) {
          if (!stall_reselected && reselect(y)) {
            stall_reselected = true;
            cg_restart = true;
            continue;
          }
          out.termination = Termination::LineSearchStalled;
          break;
        }
        std::swap(part_.basic[block.position], part_.nonbasic[*q]);
        cg_restart = true;
        continue;
      }

      bool accepted = false;
      std::size_t halvings = 0;
      const auto initial_block = block.kind;
      for (std::size_t h = 0; h <= cfg_.max_halvings && !accepted; ++h) {
        if (h > 0) {
          halvings = h;
          lambda *= cfg_.halving;
          block = Blocking{};
        }
        if (!(lambda > 0.0)) break;
        Vector y_try = y + lambda * d;
        for (std::size_t idx : part_.nonbasic) {
          const auto i = static_cast<Eigen::Index>(idx);
          y_try[i] = std::clamp(y_try[i], lo[i], hi[i]);
        }

        BasisPartition trial_part = part_;
        BasisFactor trial_factor;
        BasisFactor* factor = &factor_;
        if (block.kind == Blocking::Kind::Nonbasic) {
          y_try[static_cast<Eigen::Index>(part_.nonbasic[block.position])] = block.bound;
        } else if (block.kind == Blocking::Kind::Basic) {
          const auto q = entering_column(block.position, jac, B, y);
          trial_factor = factor_;
          if (!q || !trial_factor.replace_column(block.position, jac.column(part_.nonbasic[*q]))) {
            continue;
          }
          y_try[static_cast<Eigen::Index>(part_.basic[block.position])] = block.bound;
          std::swap(trial_part.basic[block.position], trial_part.nonbasic[*q]);
          factor = &trial_factor;
        }

        RestoreResult rr;
        try {
          rr = detail::restore(a_, y_try, trial_part, *factor, cfg_);
        } catch (const BasisFailure&) {
          continue;
        }
        out.newton_iterations_total += rr.iterations;
        if (!rr.converged || !a_.within_bounds(y_try)) continue;
        const Vector delta_z = (y_try - y).head(nz);
        const Vector q_delta = a_.objective_form().hess_times(delta_z);
        // f(y + D) - f(y) = grad^T D + 1/2 D^T Q D, exact for a quadratic.
        const double change = grad.head(nz).dot(delta_z) + 0.5 * delta_z.dot(q_delta);
        if (!(change < 0.0)) continue;

        accepted = true;
        if (cfg_.record_trace) {
          IterateRecord rec;
          rec.objective = a_.objective(y_try);
          rec.objective_change = change;
          rec.feasibility = rr.residual_norm;
          rec.direction_residual = jac.times(d).lpNorm<Eigen::Infinity>();
          rec.directional_derivative = slope;
          rec.step = lambda;
          rec.within_bounds = true;
          rec.newton_iterations = rr.iterations;
          out.trace.push_back(rec);
        }
        // The trial factor was copied from factor_, so it carries its count.
        if (factor == &trial_factor) factor_ = std::move(trial_factor);
        part_ = std::move(trial_part);
        y = std::move(y_try);
        grad.head(nz) += q_delta;
        f_y += change;
        ++grad_age;
        cg_restart = block.kind != Blocking::Kind::None;
      }

      if (spdlog::should_log(spdlog::level::debug)) {
        spdlog::debug("grg {}: f={:.12g} |d_N|={:.3e} slope={:.3e} lambda={:.3e} block={} halvings={} {}",
                      out.outer_iterations, f_y, out.final_direction_norm, slope, lambda,
                      static_cast<int>(initial_block), halvings, accepted ? "accepted" : "rejected");
      }
      if (!accepted) {
        if (!stall_reselected && reselect(y)) {
          stall_reselected = true;
          cg_restart = true;
          continue;
        }
        out.termination = Termination::LineSearchStalled;
        break;
      }
      ++out.outer_iterations;
      // Free steps that only pass after many halvings are moving at the
      // noise level of restoration; a run of them means no further progress.
      noisy_steps = initial_block == Blocking::Kind::None && halvings >= kNoisyHalvings ? noisy_steps + 1 : 0;
      if (noisy_steps >= kNoisyRun) {
        out.termination = Termination::LineSearchStalled;
        break;
      }
      stall_reselected = false;
      degenerate_pivots = 0;
      // A nonbasic slack that left zero marks an inequality turning inactive.
      // Its row is then covered by the slack alone, and keeping the old basic
      // columns on that row lets the basic block drift toward singularity.
      const bool slack_released =
          std::any_of(part_.nonbasic.begin(), part_.nonbasic.end(), [&](std::size_t idx) {
            return idx >= a_.n() && y[static_cast<Eigen::Index>(idx)] > 0.0;
          });
      if (slack_released) {
        const BasisPartition keep = part_;
        if (!reselect(y)) {
          part_ = keep;
          factor_.refactor(JacobianOp(a_, y).columns(part_.basic));
        }
        cg_restart = true;
      }
      prev_steep = steep;
      prev_precond = precond;
      prev_d = d_N;
      prev_held = held;
    }
  }

  out.y_star = y;
  out.objective_value = a_.objective(y);
  out.factorizations = total_factorizations();
  out.wall_time = Clock::now() - started;
  return out;
}

}  // namespace

SolverRun grg_solve(const AugmentedProblem& a, const Vector& y0, const SolverConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(y0.size()) != a.dim()) {
    throw DomainError("start point has length " + std::to_string(y0.size()) + ", expected " +
                      std::to_string(a.dim()));
  }
  if (!all_finite(y0)) throw DomainError("start point has non-finite entries");
  if (!a.within_bounds(y0)) throw DomainError("start point violates the variable bounds");
  const double infeas = a.residual(y0).lpNorm<1>();
  if (!(infeas <= cfg.eps_feas)) {
    throw DomainError("start point is infeasible: ||e(y0)||_1 = " + std::to_string(infeas));
  }
  Engine engine(a, cfg);
  return engine.run(y0);
}

std::optional<Vector> phase_one(const AugmentedProblem& a, const Vector& z_guess,
                                const SolverConfig& cfg) {
  cfg.validate();
  Vector y = a.with_slacks(z_guess);
  for (std::size_t j = a.n(); j < a.dim(); ++j) {
    y[static_cast<Eigen::Index>(j)] = std::max(y[static_cast<Eigen::Index>(j)], 0.0);
  }
  try {
    const BasisPartition part = select_basis(a, y);
    detail::BasisFactor factor;
    const RestoreResult rr = detail::restore(a, y, part, factor, cfg);
    if (!rr.converged || !a.within_bounds(y)) return std::nullopt;
  } catch (const BasisFailure&) {
    return std::nullopt;
  }
  return y;
}

}  // namespace onlp::grg
