#pragma once

// Client side of the outsourcing protocol: key generation, masking of a
// problem into its encrypted form, recovery of the original solution and
// KKT-based acceptance of returned results.

#include "onlp/matrix.hpp"
#include "onlp/permutation.hpp"
#include "onlp/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace onlp::transform {

struct KeyParams {
  /// Half-width of the uniform distribution for shifts and scalings.
  double N = 10.0;
  /// Constant diagonal applied to equality rows.
  double c_eq = 1.0;
  /// Constant diagonal applied to inequality rows.
  double c_ineq = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const KeyParams&, const KeyParams&) = default;
};

struct Dims {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Scalings inside (-kDeadZone * N, kDeadZone * N) are rejected so every
/// equality row scale stays invertible.
inline constexpr double kDeadZone = 1e-6;

struct SecretKey {
  Vector shift;        // r, length n
  Vector eq_scale;     // diagonal of P, length m, nonzero
  Vector ineq_scale;   // diagonal of T, length l, strictly positive
  Permutation row_perm_eq;
  Permutation row_perm_ineq;
  Permutation col_perm;
  KeyParams params;

  Dims dims() const {
    return {static_cast<std::size_t>(shift.size()), static_cast<std::size_t>(eq_scale.size()),
            static_cast<std::size_t>(ineq_scale.size())};
  }
  /// Throws DomainError when an invariant does not hold.
  void validate() const;
};

/// Draws a key. The stream is consumed in a fixed order: shift (n draws),
/// eq_scale (m accepted draws, rejecting the dead zone), ineq_scale (l),
/// then the column permutation, the equality row permutation and the
/// inequality row permutation. Each permutation is the forward shuffle
/// "for j = 1..k swap slot j with a uniform slot in 1..j".
SecretKey keygen(Dims dims, const KeyParams& params);

/// Identity key: zero shift, unit scales, identity permutations.
SecretKey identity_key(Dims dims);

/// Forward shuffle of {0..k-1} driven by the given uniform source.
template <typename Source>
Permutation forward_shuffle(std::size_t k, Source& rng) {
  std::vector<std::size_t> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  for (std::size_t j = 0; j < k; ++j) {
    const auto i = static_cast<std::size_t>(rng.below(j + 1));
    std::swap(s[i], s[j]);
  }
  return Permutation(std::move(s));
}

/// Masks p under k. Variables map as z = col_perm(x + shift); the result has
/// the same feasible set (under that map) and equal objective values.
EncryptedProblem encrypt(const NlpProblem& p, const SecretKey& k);

/// z = col_perm(x + shift).
Vector encrypt_point(const Vector& x, const SecretKey& k);

/// x = col_perm^-1(z) - shift.
Vector decrypt(const Vector& z_star, const SecretKey& k);

struct VerificationReport {
  double feasibility_residual = 0.0;
  double stationarity_residual = 0.0;
  /// Smallest multiplier over active inequalities and bounds (0 if none).
  double min_ineq_multiplier = 0.0;
  double complementarity_residual = 0.0;
  bool accepted = false;

  std::string summary() const;
};

/// First-order optimality check of x_star for p.
///
/// Equality multipliers and those of inequalities/bounds within tol of their
/// boundary are obtained by least squares on the stationarity system
/// grad f + G^T lambda + sum mu_j grad h_j - nu_lo + nu_up = 0, with every
/// inactive multiplier fixed at zero. Accepted iff feasibility <= tol,
/// stationarity <= tol * (1 + ||grad f||_inf), complementarity
/// <= tol * (1 + max multiplier), and every inequality or bound multiplier
/// is >= -tol.
VerificationReport verify_kkt(const NlpProblem& p, const Vector& x_star, double tol);

}  // namespace onlp::transform
