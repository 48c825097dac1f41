#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "glocal/dataset.hpp"

namespace glocal {

/// Trade-offs and schedule for fitting.
struct Hyperparams {
  double lambda = 1.0;    // reconstruction vs. mapping
  double lambda2 = 0.1;   // Frobenius ridge on U, V, W
  double lambda3 = 0.1;   // global manifold
  double lambda4 = 0.1;   // local manifold
  Index k = 3;            // latent dimension, also the Laplacian factor width
  Index g = 1;            // group count used when the partition is clustered
  int outer_iters = 50;
  int inner_steps = 5;
  int warm_iters = 20;
  double tol = 1e-5;      // relative objective change
  Seed seed = 0;

  /// Throws std::invalid_argument on negative weights or bad counts.
  void validate() const;
};

/// Learned parameters. score/predict use only U and W; V is kept for
/// inspecting recovered training labels.
struct GlocalModel {
  Matrix U;                     // l x k
  Matrix V;                     // k x n_train
  Matrix W;                     // d x k
  std::vector<Matrix> factors;  // g matrices, l x k, unit rows

  Index labels() const { return U.rows(); }
  Index dim() const { return W.rows(); }
  Index latent() const { return U.cols(); }
  Index groups() const { return static_cast<Index>(factors.size()); }

  /// Shape consistency and finiteness; throws ShapeError / FormatError.
  void validate() const;

  bool operator==(const GlocalModel& other) const = default;
};

/// U (W^T X), l x n, unthresholded.
Matrix score(const GlocalModel& model, const Matrix& features);
Matrix score(const GlocalModel& model, const FeatureMatrix& features);

/// Elementwise sign of the score with 0 mapped to -1.
Matrix predict(const GlocalModel& model, const FeatureMatrix& features);

template <typename Derived>
Matrix sign_labels(const Eigen::MatrixBase<Derived>& scores) {
  return scores.unaryExpr([](Scalar v) { return v > 0 ? Scalar(1) : Scalar(-1); });
}

inline constexpr const char* kModelMagic = "GLOCAL-MODEL v1";

void save_model(std::ostream& out, const GlocalModel& model,
                const std::vector<std::string>& comments = {});
GlocalModel load_model(std::istream& in);

// Dense matrix text files: optional '#' comment lines, a `rows cols` line,
// then one whitespace-separated row per line. Used for score/label outputs
// (instances as rows).
void write_dense(std::ostream& out, const Matrix& m,
                 const std::vector<std::string>& comments = {});
Matrix read_dense(std::istream& in);

}  // namespace glocal
