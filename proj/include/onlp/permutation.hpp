#pragma once

#include "onlp/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace onlp {

/// Bijection on {0..n-1}. image()[i] is the source index that lands in slot
/// i, so applying the permutation to v gives (Pv)_i = v[image[i]]. The
/// corresponding 0/1 matrix has M(i, j) = 1 iff j == image[i].
class Permutation {
 public:
  Permutation() = default;
  /// Zero-based image; throws DomainError unless it is a bijection.
  explicit Permutation(std::vector<std::size_t> image);

  static Permutation identity(std::size_t n);
  /// One-based sequence (the textual form used in key files).
  static Permutation from_sequence(std::span<const std::size_t> one_based);

  std::size_t size() const noexcept { return image_.size(); }
  const std::vector<std::size_t>& image() const noexcept { return image_; }
  std::vector<std::size_t> one_based() const;

  Permutation inverse() const;
  bool is_identity() const;

  DenseMatrix matrix() const;

  Vector apply(const Vector& v) const;
  template <typename T>
  std::vector<T> apply(const std::vector<T>& v) const {
    check_size(v.size());
    std::vector<T> out;
    out.reserve(v.size());
    for (std::size_t i : image_) out.push_back(v[i]);
    return out;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  void check_size(std::size_t n) const;
  std::vector<std::size_t> image_;
};

/// Row i of the result is row image[i] of m (the product P * m).
DenseMatrix apply_row_perm(const Permutation& p, const DenseMatrix& m);
/// Column j of the result is column image[j] of m, matching a reordering of
/// the variables by the same permutation (the product m * P^T).
DenseMatrix apply_col_perm(const DenseMatrix& m, const Permutation& p);
/// Symmetric reordering: result(i, j) = m(image[i], image[j]).
DenseMatrix apply_sym_perm(const Permutation& p, const DenseMatrix& m);

}  // namespace onlp
