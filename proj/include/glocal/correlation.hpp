#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "glocal/types.hpp"

namespace glocal {

/// Cosine similarity between the rows of a label matrix.
///
/// S(i,j) = <y_i, y_j> / (|y_i| |y_j|) over the rows y_i. Rows that are
/// entirely zero carry no evidence of correlation, so every entry touching
/// such a row (including its diagonal) is 0.
template <typename Derived>
Matrix cosine_correlation(const Eigen::MatrixBase<Derived>& labels) {
  const Matrix y = labels;
  const Vector norms = y.rowwise().norm();
  Matrix s = y * y.transpose();
  for (Index j = 0; j < s.cols(); ++j) {
    for (Index i = 0; i < s.rows(); ++i) {
      const Scalar denom = norms(i) * norms(j);
      s(i, j) = denom > 0 ? s(i, j) / denom : Scalar(0);
    }
  }
  // Exact unit diagonal and exact symmetry regardless of rounding.
  for (Index i = 0; i < s.rows(); ++i) {
    if (norms(i) > 0) s(i, i) = Scalar(1);
    for (Index j = 0; j < i; ++j) s(j, i) = s(i, j);
  }
  return s;
}

/// L = diag(S 1) - S. Throws ShapeError for a non-square or asymmetric S.
template <typename Derived>
Matrix laplacian_of(const Eigen::MatrixBase<Derived>& similarity) {
  if (similarity.rows() != similarity.cols()) {
    throw ShapeError("laplacian_of: similarity must be square, got " +
                     shape_string(similarity.rows(), similarity.cols()));
  }
  const Matrix s = similarity;
  if (s != s.transpose()) throw ShapeError("laplacian_of: similarity is not symmetric");
  Matrix l = -s;
  l.diagonal() += s.rowwise().sum();
  return l;
}

/// Elementwise sum_m beta_m * parts[m].
Matrix combine_correlations(std::span<const Matrix> parts, std::span<const Scalar> beta);

/// Rescales every row to unit Euclidean norm in place. Rows that are exactly
/// zero are replaced by seeded random unit vectors; returns how many were.
Index project_unit_rows_inplace(Matrix& z, Seed seed = 0);

/// Value-returning form of project_unit_rows_inplace.
Matrix project_unit_rows(Matrix z, Seed seed = 0);

/// l x k factor with i.i.d. standard normal entries, rows then normalised.
Matrix init_factor(Index labels, Index k, Seed seed);

/// tr(F^T Z Z^T F) evaluated as |Z^T F|_F^2, never forming Z Z^T.
template <typename DZ, typename DF>
Scalar factored_trace(const Eigen::MatrixBase<DZ>& z, const Eigen::MatrixBase<DF>& f) {
  return (z.transpose() * f).squaredNorm();
}

// Comma-separated l x l matrix, one row per line.
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace glocal
