#include "onlp/transform.hpp"

#include "onlp/errors.hpp"
#include "onlp/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace onlp::transform {

void KeyParams::validate() const {
  if (!(N > 0.0) || !std::isfinite(N)) throw DomainError("key parameter N must be > 0");
  if (!(c_eq > 0.0) || !std::isfinite(c_eq)) throw DomainError("key parameter c_eq must be > 0");
  if (!(c_ineq > 0.0) || !std::isfinite(c_ineq)) {
    throw DomainError("key parameter c_ineq must be > 0");
  }
}

void SecretKey::validate() const {
  params.validate();
  const Dims d = dims();
  if (col_perm.size() != d.n || row_perm_eq.size() != d.m || row_perm_ineq.size() != d.l) {
    throw DomainError("key permutation sizes do not match key vectors");
  }
  if (!shift.allFinite() || !eq_scale.allFinite() || !ineq_scale.allFinite()) {
    throw DomainError("key contains non-finite values");
  }
  for (Eigen::Index i = 0; i < eq_scale.size(); ++i) {
    if (eq_scale[i] == 0.0) throw DomainError("equality scale entry is zero");
  }
  for (Eigen::Index j = 0; j < ineq_scale.size(); ++j) {
    if (!(ineq_scale[j] > 0.0)) throw DomainError("inequality scale entry is not positive");
  }
}

SecretKey keygen(Dims dims, const KeyParams& params) {
  params.validate();
  Rng rng(params.seed);
  const double N = params.N;
  SecretKey k;
  k.params = params;

  k.shift.resize(static_cast<Eigen::Index>(dims.n));
  for (auto& v : k.shift) v = rng.uniform(-N, N);

  k.eq_scale.resize(static_cast<Eigen::Index>(dims.m));
  for (auto& v : k.eq_scale) {
    do {
      v = rng.uniform(-N, N);
    } while (std::abs(v) < kDeadZone * N);
  }

  k.ineq_scale.resize(static_cast<Eigen::Index>(dims.l));
  for (auto& v : k.ineq_scale) v = rng.uniform(kDeadZone * N, N);

  k.col_perm = forward_shuffle(dims.n, rng);
  k.row_perm_eq = forward_shuffle(dims.m, rng);
  k.row_perm_ineq = forward_shuffle(dims.l, rng);
  return k;
}

SecretKey identity_key(Dims dims) {
  SecretKey k;
  k.shift = Vector::Zero(static_cast<Eigen::Index>(dims.n));
  k.eq_scale = Vector::Ones(static_cast<Eigen::Index>(dims.m));
  k.ineq_scale = Vector::Ones(static_cast<Eigen::Index>(dims.l));
  k.col_perm = Permutation::identity(dims.n);
  k.row_perm_eq = Permutation::identity(dims.m);
  k.row_perm_ineq = Permutation::identity(dims.l);
  return k;
}

namespace {

void check_dims(const NlpProblem& p, const SecretKey& k) {
  const Dims d = k.dims();
  if (d.n != p.n() || d.m != p.m() || d.l != p.l()) {
    throw DomainError("key dimensions (" + std::to_string(d.n) + "," + std::to_string(d.m) + "," +
                      std::to_string(d.l) + ") do not match problem (" + std::to_string(p.n()) +
                      "," + std::to_string(p.m()) + "," + std::to_string(p.l()) + ")");
  }
}

}  // namespace

EncryptedProblem encrypt(const NlpProblem& p, const SecretKey& k) {
  check_dims(p, k);
  k.validate();
  const Vector& r = k.shift;
  const Permutation& cols = k.col_perm;

  // Objective: substitute x = w - r, then reorder variables.
  QuadraticForm objective = p.objective().shifted(r).permuted(cols);

  // Equalities: G(w - r) = b  <=>  G w = b + G r; scale each row, reorder.
  DenseMatrix g = p.eq_matrix();
  Vector b = p.eq_rhs();
  if (p.m() > 0) b += g * r;
  for (std::size_t i = 0; i < p.m(); ++i) {
    const double s = k.params.c_eq * k.eq_scale[static_cast<Eigen::Index>(i)];
    g.row(static_cast<Eigen::Index>(i)) *= s;
    b[static_cast<Eigen::Index>(i)] *= s;
  }
  if (p.m() > 0) {
    g = apply_col_perm(apply_row_perm(k.row_perm_eq, g), cols);
    b = k.row_perm_eq.apply(b);
  } else {
    g.resize(0, static_cast<Eigen::Index>(p.n()));
  }

  // Inequalities: h(w - r) <= beta moves the shift constant to the rhs, then
  // both sides are multiplied by a positive factor.
  std::vector<Inequality> ineqs;
  ineqs.reserve(p.l());
  for (std::size_t j = 0; j < p.l(); ++j) {
    const auto& src = p.ineqs()[j];
    const QuadraticForm moved = src.form.shifted(r);
    const double s = k.params.c_ineq * k.ineq_scale[static_cast<Eigen::Index>(j)];
    Inequality out;
    out.rhs = s * (src.rhs - (moved.const_term() - src.form.const_term()));
    out.form = moved.with_const_term(src.form.const_term()).scaled(s).permuted(cols);
    ineqs.push_back(std::move(out));
  }
  ineqs = k.row_perm_ineq.apply(ineqs);

  Vector lower = cols.apply(Vector(p.lower() + r));
  Vector upper = cols.apply(Vector(p.upper() + r));

  // Row scaling by nonzero factors and permutations preserve the rank of G.
  return EncryptedProblem(NlpProblem(NlpProblem::TrustedRank{}, std::move(objective), std::move(g),
                                     std::move(b), std::move(ineqs), std::move(lower),
                                     std::move(upper)));
}

Vector encrypt_point(const Vector& x, const SecretKey& k) {
  if (x.size() != k.shift.size()) throw DomainError("encrypt_point: dimension mismatch");
  return k.col_perm.apply(Vector(x + k.shift));
}

Vector decrypt(const Vector& z_star, const SecretKey& k) {
  if (z_star.size() != k.shift.size()) throw DomainError("decrypt: dimension mismatch");
  return k.col_perm.inverse().apply(z_star) - k.shift;
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  os << (accepted ? "accepted" : "rejected") << ": feasibility=" << feasibility_residual
     << " stationarity=" << stationarity_residual << " min_multiplier=" << min_ineq_multiplier
     << " complementarity=" << complementarity_residual;
  return os.str();
}

}  // namespace onlp::transform
