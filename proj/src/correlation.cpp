#include "glocal/correlation.hpp"

#include <ostream>
#include <random>

namespace glocal {

Matrix combine_correlations(std::span<const Matrix> parts, std::span<const Scalar> beta) {
  if (parts.size() != beta.size()) {
    throw ShapeError("combine_correlations: " + std::to_string(parts.size()) +
                     " matrices but " + std::to_string(beta.size()) + " weights");
  }
  if (parts.empty()) throw ShapeError("combine_correlations: no matrices");
  Matrix out = Matrix::Zero(parts[0].rows(), parts[0].cols());
  for (std::size_t m = 0; m < parts.size(); ++m) {
    require_shape(parts[m], out.rows(), out.cols(), "combine_correlations");
    out += beta[m] * parts[m];
  }
  return out;
}

Index project_unit_rows_inplace(Matrix& z, Seed seed) {
  Index repaired = 0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  for (Index i = 0; i < z.rows(); ++i) {
    Scalar norm = z.row(i).norm();
    while (norm == Scalar(0)) {
      for (Index j = 0; j < z.cols(); ++j) z(i, j) = normal(rng);
      norm = z.row(i).norm();
      ++repaired;
    }
    z.row(i) /= norm;
  }
  return repaired;
}

Matrix project_unit_rows(Matrix z, Seed seed) {
  project_unit_rows_inplace(z, seed);
  return z;
}

Matrix init_factor(Index labels, Index k, Seed seed) {
  if (labels < 1 || k < 1) throw ShapeError("init_factor: l and k must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix z(labels, k);
  for (Index i = 0; i < labels; ++i) {
    for (Index j = 0; j < k; ++j) z(i, j) = normal(rng);
  }
  project_unit_rows_inplace(z, seed + 1);
  return z;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  const auto old = out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

}  // namespace glocal
