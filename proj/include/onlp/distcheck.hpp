#pragma once

// Empirical checks that masked coefficients carry no usable information:
// the distribution of a masked matrix entry and the uniformity of the row and
// column shuffles.

#include "onlp/matrix.hpp"
#include "onlp/transform.hpp"

#include <cstddef>
#include <string>

namespace onlp::bench {

inline constexpr double kSignificance = 0.01;
inline constexpr double kSignTolerance = 0.02;
inline constexpr std::size_t kMinTrials = 1000;

struct DistcheckReport {
  double entry = 0.0;
  std::size_t trials = 0;
  /// Support of the reference uniform law: (-half_width, half_width) with
  /// half_width = c_eq * N * |entry|.
  double half_width = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;
  /// Fraction of masked values above zero.
  double sign_frequency = 0.0;
  bool ks_pass = false;
  bool sign_pass = false;

  bool passed() const noexcept { return ks_pass && sign_pass; }
  std::string summary() const;
};

/// Masks a 1 x 1 equality matrix holding entry under trials keys drawn from
/// params (key t seeded from a stream rooted at params.seed) and compares the
/// masked values against the uniform law by Kolmogorov-Smirnov. DomainError
/// when entry is zero (scaling keeps it zero) or trials < kMinTrials.
DistcheckReport distcheck(double entry, const transform::KeyParams& params, std::size_t trials);

/// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct UniformityReport {
  std::size_t size = 0;
  std::size_t keys = 0;
  /// freq(i, k): fraction of keys that sent original row (column) i to
  /// masked slot k.
  DenseMatrix row_frequency;
  DenseMatrix col_frequency;
  /// Largest |freq - 1/size| over the row table; decides pass.
  double max_deviation = 0.0;
  /// Same over the column table, reported only.
  double max_col_deviation = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return max_deviation <= tolerance; }
  std::string summary() const;
};

/// Encrypts a size x size problem whose equality matrix is lower triangular
/// with ones, so every row and every column has a distinct nonzero count that
/// survives scaling and reordering, and tallies where each one lands.
UniformityReport permutation_uniformity(std::size_t size, const transform::KeyParams& params,
                                        std::size_t keys, double tolerance = 0.03);

}  // namespace onlp::bench
