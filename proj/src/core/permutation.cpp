#include "onlp/permutation.hpp"

#include "onlp/errors.hpp"

#include <numeric>
#include <string>

namespace onlp {

Permutation::Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size(), false);
  for (std::size_t idx : image_) {
    if (idx >= image_.size()) {
      throw DomainError("permutation index " + std::to_string(idx) + " out of range for size " +
                        std::to_string(image_.size()));
    }
    if (seen[idx]) throw DomainError("permutation index " + std::to_string(idx) + " repeated");
    seen[idx] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> image(n);
  std::iota(image.begin(), image.end(), std::size_t{0});
  return Permutation(std::move(image));
}

Permutation Permutation::from_sequence(std::span<const std::size_t> one_based) {
  std::vector<std::size_t> image;
  image.reserve(one_based.size());
  for (std::size_t idx : one_based) {
    if (idx == 0) throw DomainError("permutation sequence is one-based; got 0");
    image.push_back(idx - 1);
  }
  return Permutation(std::move(image));
}

std::vector<std::size_t> Permutation::one_based() const {
  std::vector<std::size_t> out(image_);
  for (auto& v : out) ++v;
  return out;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(image_.size());
  for (std::size_t i = 0; i < image_.size(); ++i) inv[image_[i]] = i;
  return Permutation(std::move(inv));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < image_.size(); ++i) {
    if (image_[i] != i) return false;
  }
  return true;
}

DenseMatrix Permutation::matrix() const {
  const auto n = static_cast<Eigen::Index>(image_.size());
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, static_cast<Eigen::Index>(image_[i])) = 1.0;
  return m;
}

Vector Permutation::apply(const Vector& v) const {
  check_size(static_cast<std::size_t>(v.size()));
  Vector out(v.size());
  for (std::size_t i = 0; i < image_.size(); ++i) out[i] = v[image_[i]];
  return out;
}

void Permutation::check_size(std::size_t n) const {
  if (n != image_.size()) {
    throw DomainError("permutation of size " + std::to_string(image_.size()) +
                      " applied to object of size " + std::to_string(n));
  }
}

DenseMatrix apply_row_perm(const Permutation& p, const DenseMatrix& m) {
  if (p.size() != static_cast<std::size_t>(m.rows())) {
    throw DomainError("row permutation size does not match matrix rows");
  }
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < p.size(); ++i) out.row(i) = m.row(p.image()[i]);
  return out;
}

DenseMatrix apply_col_perm(const DenseMatrix& m, const Permutation& p) {
  if (p.size() != static_cast<std::size_t>(m.cols())) {
    throw DomainError("column permutation size does not match matrix columns");
  }
  DenseMatrix out(m.rows(), m.cols());
  const auto& image = p.image();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < image.size(); ++j) out(r, j) = m(r, image[j]);
  }
  return out;
}

DenseMatrix apply_sym_perm(const Permutation& p, const DenseMatrix& m) {
  if (m.rows() != m.cols() || p.size() != static_cast<std::size_t>(m.rows())) {
    throw DomainError("symmetric permutation needs a square matrix of matching size");
  }
  return apply_col_perm(apply_row_perm(p, m), p);
}

}  // namespace onlp
