#include "onlp/matrix.hpp"

#include "onlp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onlp {

bool all_finite(const DenseMatrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

double norm_inf(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

LuFactor::LuFactor(const DenseMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    throw DomainError("LU factorization needs a square matrix, got " + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()));
  }
  if (a.rows() == 0) return;
  lu_.compute(a);
  const auto& packed = lu_.matrixLU();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  double min_pivot = std::abs(packed(0, 0));
  double max_pivot = min_pivot;
  for (Eigen::Index i = 1; i < packed.rows(); ++i) {
    const double p = std::abs(packed(i, i));
    min_pivot = std::min(min_pivot, p);
    max_pivot = std::max(max_pivot, p);
  }
  if (!(min_pivot > rel_tol * scale)) {
    throw SingularMatrix("matrix is singular within pivot tolerance (min pivot " +
                         std::to_string(min_pivot) + ")");
  }
  pivot_ratio_ = min_pivot / max_pivot;
}

Vector LuFactor::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size()) {
    throw DomainError("right-hand side has wrong length");
  }
  if (empty()) return Vector(0);
  return lu_.solve(rhs);
}

Vector LuFactor::solve_transpose(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size()) {
    throw DomainError("right-hand side has wrong length");
  }
  if (empty()) return Vector(0);
  // P A = L U, so A^T x = b is solved as U^T w = b, L^T v = w, x = P^T v.
  // Going through lu_.transpose() would copy the whole factorization.
  const auto& packed = lu_.matrixLU();
  Vector v = packed.triangularView<Eigen::Upper>().transpose().solve(rhs);
  packed.triangularView<Eigen::UnitLower>().transpose().solveInPlace(v);
  return lu_.permutationP().transpose() * v;
}

Vector solve_linear(const DenseMatrix& a, const Vector& rhs) {
  if (a.rows() != rhs.size()) throw DomainError("solve_linear: dimension mismatch");
  return LuFactor(a).solve(rhs);
}

std::size_t numerical_rank(const DenseMatrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  // Pivot over the shorter dimension; rank(A) = rank(A^T).
  Eigen::MatrixXd work = a.rows() <= a.cols() ? Eigen::MatrixXd(a.transpose()) : Eigen::MatrixXd(a);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(work);
  const double threshold = rel_tol * norm_inf(a);
  const auto& r = qr.matrixR();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < std::min(r.rows(), r.cols()); ++i) {
    if (std::abs(r(i, i)) > threshold) ++rank;
  }
  return rank;
}

}  // namespace onlp
