#include "basis_factor.hpp"
#include "onlp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onlp::grg {

namespace detail {

constexpr double kSweepBudget = 0.25;

DenseMatrix gather_columns(const DenseMatrix& m, const std::vector<std::size_t>& cols) {
  DenseMatrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(r, static_cast<Eigen::Index>(c)) = m(r, static_cast<Eigen::Index>(cols[c]));
    }
  }
  return out;
}

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
  }
  return out;
}

void scatter(Vector& into, const std::vector<std::size_t>& idx, const Vector& values) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    into[static_cast<Eigen::Index>(idx[i])] = values[static_cast<Eigen::Index>(i)];
  }
}

JacobianOp::JacobianOp(const AugmentedProblem& a, const Vector& y) : a_(&a) {
  const auto n = static_cast<Eigen::Index>(a.n());
  const auto l = static_cast<Eigen::Index>(a.l());
  ineq_grad_ = a.ineq_gradients(y.head(n));
  norm_inf_ = a.eq_norm_inf();
  if (l > 0) norm_inf_ = std::max(norm_inf_, onlp::norm_inf(ineq_grad_) + 1.0);
}

Vector JacobianOp::times(const Vector& v) const {
  const auto n = static_cast<Eigen::Index>(a_->n());
  const auto m = static_cast<Eigen::Index>(a_->m());
  const auto l = static_cast<Eigen::Index>(a_->l());
  Vector out(m + l);
  if (m > 0) out.head(m).noalias() = a_->eq_matrix() * v.head(n);
  if (l > 0) {
    out.tail(l).noalias() = ineq_grad_ * v.head(n);
    out.tail(l) += v.tail(l);
  }
  return out;
}

Vector JacobianOp::transpose_times(const Vector& u) const {
  const auto n = static_cast<Eigen::Index>(a_->n());
  const auto m = static_cast<Eigen::Index>(a_->m());
  const auto l = static_cast<Eigen::Index>(a_->l());
  Vector out = Vector::Zero(n + l);
  if (m > 0) out.head(n).noalias() += a_->eq_matrix().transpose() * u.head(m);
  if (l > 0) {
    out.head(n).noalias() += ineq_grad_.transpose() * u.tail(l);
    out.tail(l) = u.tail(l);
  }
  return out;
}

Vector JacobianOp::column(std::size_t j) const {
  const std::size_t n = a_->n();
  const auto m = static_cast<Eigen::Index>(a_->m());
  const auto l = static_cast<Eigen::Index>(a_->l());
  Vector out = Vector::Zero(m + l);
  if (j < n) {
    const auto c = static_cast<Eigen::Index>(j);
    if (m > 0) out.head(m) = a_->eq_matrix().col(c);
    if (l > 0) out.tail(l) = ineq_grad_.col(c);
  } else {
    out[m + static_cast<Eigen::Index>(j - n)] = 1.0;
  }
  return out;
}

DenseMatrix JacobianOp::columns(const std::vector<std::size_t>& idx) const {
  const std::size_t n = a_->n();
  const auto m = static_cast<Eigen::Index>(a_->m());
  const auto l = static_cast<Eigen::Index>(a_->l());
  DenseMatrix out = DenseMatrix::Zero(m + l, static_cast<Eigen::Index>(idx.size()));
  // Row by row, since both sources are stored by rows.
  for (Eigen::Index r = 0; r < m + l; ++r) {
    const double* src = r < m ? a_->eq_matrix().row(r).data() : ineq_grad_.row(r - m).data();
    for (std::size_t c = 0; c < idx.size(); ++c) {
      if (idx[c] < n) out(r, static_cast<Eigen::Index>(c)) = src[idx[c]];
    }
  }
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] >= n) out(m + static_cast<Eigen::Index>(idx[c] - n), static_cast<Eigen::Index>(c)) = 1.0;
  }
  return out;
}

void BasisFactor::refactor(const DenseMatrix& block) {
  etas_.clear();
  valid_ = false;
  if (block.rows() != block.cols()) throw DomainError("basic block must be square");
  const Eigen::Index k = block.rows();
  size_ = k;

  // Columns that are exact unit vectors, each in a row of its own, split
  // off: with them moved last the block is [C 0; E I] and only the core C
  // needs an LU factorization.
  std::vector<Eigen::Index> unit_row_of(static_cast<std::size_t>(k), -1);
  std::vector<bool> row_taken(static_cast<std::size_t>(k), false);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index hit = -1;
    bool unit = true;
    for (Eigen::Index r = 0; r < k && unit; ++r) {
      const double v = block(r, c);
      if (v == 0.0) continue;
      if (v != 1.0 || hit >= 0) unit = false;
      hit = r;
    }
    if (unit && hit >= 0 && !row_taken[static_cast<std::size_t>(hit)]) {
      unit_row_of[static_cast<std::size_t>(c)] = hit;
      row_taken[static_cast<std::size_t>(hit)] = true;
    }
  }
  core_rows_.clear();
  core_cols_.clear();
  unit_rows_.clear();
  unit_cols_.clear();
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index r = unit_row_of[static_cast<std::size_t>(c)];
    if (r >= 0) {
      unit_cols_.push_back(c);
      unit_rows_.push_back(r);
    } else {
      core_cols_.push_back(c);
    }
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    if (!row_taken[static_cast<std::size_t>(r)]) core_rows_.push_back(r);
  }
  const auto nc = static_cast<Eigen::Index>(core_cols_.size());
  const auto nu = static_cast<Eigen::Index>(unit_cols_.size());
  DenseMatrix core(nc, nc);
  coupling_.resize(nu, nc);
  for (Eigen::Index j = 0; j < nc; ++j) {
    const Eigen::Index c = core_cols_[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < nc; ++i) core(i, j) = block(core_rows_[static_cast<std::size_t>(i)], c);
    for (Eigen::Index i = 0; i < nu; ++i) coupling_(i, j) = block(unit_rows_[static_cast<std::size_t>(i)], c);
  }
  try {
    lu_ = LuFactor(core, kBasisPivotTolerance);
  } catch (const SingularMatrix& e) {
    throw BasisFailure(std::string("basic Jacobian block is singular: ") + e.what());
  }
  valid_ = true;
  ++factorizations_;
  sweeps_ = 0;
  sweep_budget_ = std::max<std::size_t>(4, static_cast<std::size_t>(kSweepBudget * static_cast<double>(nc)));
}

Vector BasisFactor::apply(const Vector& rhs) const {
  // [C 0; E I] [x_c; x_u] = [b_c; b_u].
  Vector b_core(static_cast<Eigen::Index>(core_rows_.size()));
  for (std::size_t i = 0; i < core_rows_.size(); ++i) b_core[static_cast<Eigen::Index>(i)] = rhs[core_rows_[i]];
  const Vector x_core = lu_.solve(b_core);
  const Vector e_x = coupling_ * x_core;
  Vector x(size_);
  for (std::size_t j = 0; j < core_cols_.size(); ++j) x[core_cols_[j]] = x_core[static_cast<Eigen::Index>(j)];
  for (std::size_t i = 0; i < unit_cols_.size(); ++i) {
    x[unit_cols_[i]] = rhs[unit_rows_[i]] - e_x[static_cast<Eigen::Index>(i)];
  }
  for (const Eta& eta : etas_) {
    const double xp = x[eta.pos] / eta.w[eta.pos];
    x -= xp * eta.w;
    x[eta.pos] = xp;
  }
  return x;
}

Vector BasisFactor::apply_transpose(const Vector& rhs) const {
  Vector t = rhs;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const double wp = it->w[it->pos];
    const double others = it->w.dot(t) - wp * t[it->pos];
    t[it->pos] = (t[it->pos] - others) / wp;
  }
  // [C^T E^T; 0 I] [u_c; u_u] = [t_c; t_u].
  Vector t_unit(static_cast<Eigen::Index>(unit_cols_.size()));
  for (std::size_t i = 0; i < unit_cols_.size(); ++i) t_unit[static_cast<Eigen::Index>(i)] = t[unit_cols_[i]];
  Vector t_core(static_cast<Eigen::Index>(core_cols_.size()));
  for (std::size_t j = 0; j < core_cols_.size(); ++j) t_core[static_cast<Eigen::Index>(j)] = t[core_cols_[j]];
  if (t_unit.size() > 0) t_core.noalias() -= coupling_.transpose() * t_unit;
  const Vector u_core = lu_.solve_transpose(t_core);
  Vector u(size_);
  for (std::size_t i = 0; i < core_rows_.size(); ++i) u[core_rows_[i]] = u_core[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < unit_rows_.size(); ++i) u[unit_rows_[i]] = t_unit[static_cast<Eigen::Index>(i)];
  return u;
}

bool BasisFactor::replace_column(std::size_t p, const Vector& column) {
  if (!valid_) return false;
  const auto pos = static_cast<Eigen::Index>(p);
  Vector w = apply(column);
  const double scale = w.cwiseAbs().maxCoeff();
  if (!(std::abs(w[pos]) > 1e-9 * scale)) return false;
  etas_.push_back({pos, std::move(w)});
  return true;
}

template <bool Transposed>
Vector BasisFactor::refined(const DenseMatrix& block, const Vector& rhs, double rel_tol) {
  auto base_solve = [&](const Vector& b) { return Transposed ? apply_transpose(b) : apply(b); };
  auto product = [&](const Vector& x) -> Vector {
    if constexpr (Transposed) {
      return block.transpose() * x;
    } else {
      return block * x;
    }
  };
  if (!valid_ || etas_.size() > kMaxEtas || sweeps_ > sweep_budget_) refactor(block);
  const double block_norm = onlp::norm_inf(block);
  const double rhs_norm = rhs.size() > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0;
  auto tolerance = [&](const Vector& x) {
    const double x_norm = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
    return rel_tol * (rhs_norm + block_norm * x_norm) + 1e-300;
  };

  for (int attempt = 0;; ++attempt) {
    Vector x = base_solve(rhs);
    Vector res = rhs - product(x);
    double res_norm = res.size() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
    bool ok = all_finite(x);
    for (int sweep = 0; ok && sweep < 10 && res_norm > tolerance(x); ++sweep) {
      ++sweeps_;
      x += base_solve(res);
      res = rhs - product(x);
      const double next = res.size() > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
      const bool progress = next < 0.5 * res_norm;
      res_norm = next;
      ok = all_finite(x);
      if (!progress) break;
    }
    if ((ok && res_norm <= 1e2 * tolerance(x)) || attempt == 1) {
      if (!ok) throw BasisFailure("linear solve with the basic block produced non-finite values");
      return x;
    }
    // The stored factorization is too far from this block; start over.
    refactor(block);
  }
}

Vector BasisFactor::solve(const DenseMatrix& block, const Vector& rhs, double rel_tol) {
  return refined<false>(block, rhs, rel_tol);
}

Vector BasisFactor::solve_transpose(const DenseMatrix& block, const Vector& rhs, double rel_tol) {
  return refined<true>(block, rhs, rel_tol);
}

RestoreResult restore(const AugmentedProblem& a, Vector& y, const BasisPartition& part,
                      BasisFactor& factor, const SolverConfig& cfg) {
  // Chord steps apply the stored factorization as is. Once one of them fails
  // to cut the residual by this factor, the remaining steps are solved
  // against the Jacobian at the current iterate.
  constexpr double kChordContraction = 0.1;
  RestoreResult result;
  Vector e = a.residual(y);
  double norm = e.lpNorm<1>();
  bool exact = !cfg.chord_newton || !factor.valid();
  // Past eps_feas, keep stepping while Newton still contracts strongly. The
  // leftover residual otherwise perturbs f by more than the first-order
  // decrease of short steps.
  bool polishing = false;
  while (result.iterations < cfg.max_newton && norm > 0.0) {
    if (norm <= cfg.eps_feas) polishing = true;
    Vector step;
    if (exact) {
      if (!cfg.chord_newton) factor.invalidate();
      const JacobianOp jac(a, y);
      step = factor.solve(jac.columns(part.basic), e, kLooseSolve);
    } else {
      step = factor.apply(e);
    }
    Vector next_y = y;
    for (std::size_t i = 0; i < part.basic.size(); ++i) {
      next_y[static_cast<Eigen::Index>(part.basic[i])] -= step[static_cast<Eigen::Index>(i)];
    }
    Vector next_e = a.residual(next_y);
    const double next = next_e.lpNorm<1>();
    const bool contracted = next <= kChordContraction * norm;
    if (!exact && !contracted) {
      exact = true;
      if (!(next < norm)) {
        ++result.iterations;
        continue;
      }
    }
    if (polishing && !(next < 0.1 * norm)) break;
    ++result.iterations;
    y = std::move(next_y);
    e = std::move(next_e);
    norm = next;
    if (!std::isfinite(norm)) break;
  }
  result.residual_norm = norm;
  result.converged = norm <= cfg.eps_feas;
  return result;
}

}  // namespace detail

namespace {

double bound_distance(double y, double lo, double hi) {
  return std::max(0.0, std::min(y - lo, hi - y));
}

void check_partition(const AugmentedProblem& a, const BasisPartition& part) {
  if (part.basic.size() != a.constraint_count() ||
      part.basic.size() + part.nonbasic.size() != a.dim()) {
    throw DomainError("basis partition has wrong sizes");
  }
}

void check_point(const AugmentedProblem& a, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != a.dim()) {
    throw DomainError("point has length " + std::to_string(y.size()) + ", expected " +
                      std::to_string(a.dim()));
  }
}

}  // namespace

BasisPartition select_basis(const AugmentedProblem& a, const Vector& y) {
  const DenseMatrix jac = a.jacobian(y);
  const Eigen::Index cols = jac.cols();
  const std::size_t n = a.n();
  const std::size_t m = a.m();
  BasisPartition part;
  std::vector<bool> taken(static_cast<std::size_t>(cols), false);

  // A slack strictly above zero is basic for its own row. Its column is a
  // unit vector, so the basic block stays block triangular and only the
  // remaining rows need pivoting.
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < m; ++i) rows.push_back(static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < a.l(); ++j) {
    const auto col = static_cast<Eigen::Index>(n + j);
    if (y[col] > a.lower()[col]) {
      taken[static_cast<std::size_t>(col)] = true;
    } else {
      rows.push_back(static_cast<Eigen::Index>(m + j));
    }
  }
  const auto k_rows = static_cast<Eigen::Index>(rows.size());

  // Row equilibration makes the choice independent of constraint scaling.
  Eigen::MatrixXd work(k_rows, cols);
  for (Eigen::Index r = 0; r < k_rows; ++r) {
    work.row(r) = jac.row(rows[static_cast<std::size_t>(r)]);
    const double scale = work.row(r).cwiseAbs().maxCoeff();
    if (scale == 0.0) throw BasisFailure("Jacobian has an all-zero row");
    work.row(r) /= scale;
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (taken[static_cast<std::size_t>(j)]) work.col(j).setZero();
  }

  Vector weight(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double dist = bound_distance(y[j], a.lower()[j], a.upper()[j]);
    weight[j] = (std::isinf(dist) ? 1.0 : dist / (1.0 + dist)) + 1e-3;
  }

  Vector norms = work.colwise().norm().transpose();
  const double reference = k_rows > 0 ? norms.maxCoeff() : 0.0;

  for (Eigen::Index k = 0; k < k_rows; ++k) {
    Eigen::Index best = -1;
    double best_score = -1.0;
    double best_norm = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      best_norm = std::max(best_norm, norms[j]);
      const double score = norms[j] * weight[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best < 0 || !(best_norm > kBasisPivotTolerance * reference)) {
      throw BasisFailure("Jacobian is rank deficient: rank " + std::to_string(k) + " < " +
                         std::to_string(k_rows) + " on the pivoted rows");
    }
    if (!(norms[best] > 1e-8 * best_norm)) {
      // Weighted choice is numerically negligible; fall back to the largest.
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!taken[static_cast<std::size_t>(j)] && norms[j] == best_norm) {
          best = j;
          break;
        }
      }
    }
    taken[static_cast<std::size_t>(best)] = true;

    // Householder reflection zeroing column `best` below row k.
    const Eigen::Index len = k_rows - k;
    if (len > 1) {
      Eigen::VectorXd essential(len - 1);
      double tau = 0.0;
      double beta = 0.0;
      work.col(best).tail(len).makeHouseholder(essential, tau, beta);
      Eigen::VectorXd v(len);
      v[0] = 1.0;
      v.tail(len - 1) = essential;
      auto block = work.bottomRows(len);
      const Eigen::RowVectorXd vt_block = v.transpose() * block;
      block.noalias() -= tau * v * vt_block;
    }
    // Downdate the remaining norms by the entry now in the pivot row;
    // recompute when cancellation has eaten most of the digits.
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double top = work(k, j);
      const double left = norms[j] * norms[j] - top * top;
      if (len <= 1) {
        norms[j] = 0.0;
      } else if (left > 1e-4 * norms[j] * norms[j]) {
        norms[j] = std::sqrt(left);
      } else {
        norms[j] = work.col(j).tail(len - 1).norm();
      }
    }
  }

  for (Eigen::Index j = 0; j < cols; ++j) {
    (taken[static_cast<std::size_t>(j)] ? part.basic : part.nonbasic).push_back(static_cast<std::size_t>(j));
  }
  return part;
}

Vector reduced_gradient(const AugmentedProblem& a, const Vector& y, const BasisPartition& part) {
  check_point(a, y);
  check_partition(a, part);
  const detail::JacobianOp jac(a, y);
  const DenseMatrix basic = jac.columns(part.basic);
  const Vector grad = a.objective_gradient(y);
  detail::BasisFactor factor;
  factor.refactor(basic);
  const Vector u = factor.solve_transpose(basic, detail::gather(grad, part.basic));
  return detail::gather(grad, part.nonbasic) - detail::gather(jac.transpose_times(u), part.nonbasic);
}

Vector nonbasic_direction(const Vector& r, const Vector& y, const BasisPartition& part,
                          const Vector& lower, const Vector& upper) {
  if (static_cast<std::size_t>(r.size()) != part.nonbasic.size()) {
    throw DomainError("reduced gradient length does not match the nonbasic set");
  }
  Vector d(r.size());
  for (std::size_t i = 0; i < part.nonbasic.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(part.nonbasic[i]);
    const double step = -r[static_cast<Eigen::Index>(i)];
    const bool blocked_low = y[idx] <= lower[idx] && step < 0.0;
    const bool blocked_high = y[idx] >= upper[idx] && step > 0.0;
    d[static_cast<Eigen::Index>(i)] = (blocked_low || blocked_high) ? 0.0 : step;
  }
  return d;
}

Vector basic_direction(const Vector& d_N, const AugmentedProblem& a, const Vector& y,
                       const BasisPartition& part) {
  check_point(a, y);
  check_partition(a, part);
  if (static_cast<std::size_t>(d_N.size()) != part.nonbasic.size()) {
    throw DomainError("nonbasic direction has wrong length");
  }
  const detail::JacobianOp jac(a, y);
  const DenseMatrix basic = jac.columns(part.basic);
  Vector full = Vector::Zero(static_cast<Eigen::Index>(a.dim()));
  detail::scatter(full, part.nonbasic, d_N);
  detail::BasisFactor factor;
  factor.refactor(basic);
  return -factor.solve(basic, jac.times(full));
}

Vector assemble(const BasisPartition& part, const Vector& d_B, const Vector& d_N) {
  if (static_cast<std::size_t>(d_B.size()) != part.basic.size() ||
      static_cast<std::size_t>(d_N.size()) != part.nonbasic.size()) {
    throw DomainError("assemble: direction parts do not match the partition");
  }
  Vector d(static_cast<Eigen::Index>(part.basic.size() + part.nonbasic.size()));
  detail::scatter(d, part.basic, d_B);
  detail::scatter(d, part.nonbasic, d_N);
  return d;
}

RestoreResult newton_restore(const AugmentedProblem& a, const Vector& y_B_init,
                             const Vector& y_N_fixed, const BasisPartition& part,
                             const SolverConfig& cfg) {
  check_partition(a, part);
  if (static_cast<std::size_t>(y_B_init.size()) != part.basic.size() ||
      static_cast<std::size_t>(y_N_fixed.size()) != part.nonbasic.size()) {
    throw DomainError("newton_restore: basic/nonbasic vectors have wrong lengths");
  }
  Vector y = assemble(part, y_B_init, y_N_fixed);
  detail::BasisFactor factor;
  RestoreResult result = detail::restore(a, y, part, factor, cfg);
  result.y_basic = detail::gather(y, part.basic);
  return result;
}

}  // namespace onlp::grg
