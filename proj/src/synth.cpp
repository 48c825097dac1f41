#include "glocal/synth.hpp"

#include <random>

#include "glocal/model.hpp"

namespace glocal {

namespace {

Matrix normal_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

SynthData synthesize(const SynthSpec& spec) {
  if (spec.labels < 2 || spec.instances < 1 || spec.dim < 1 || spec.latent < 1) {
    throw std::invalid_argument("synthesize: need l >= 2 and n, d, k >= 1");
  }
  if (!(spec.noise >= 0.0)) throw std::invalid_argument("synthesize: noise must be >= 0");
  std::mt19937_64 rng(spec.seed);
  const Matrix x = normal_matrix(spec.dim, spec.instances, rng);
  const Matrix u = normal_matrix(spec.labels, spec.latent, rng);
  const Matrix w = normal_matrix(spec.dim, spec.latent, rng);
  const Matrix noise = normal_matrix(spec.labels, spec.instances, rng);

  SynthData out;
  out.planted_scores = u * (w.transpose() * x);
  out.full = Dataset(FeatureMatrix(x),
                     LabelMatrix(sign_labels(out.planted_scores + spec.noise * noise)));
  auto masked = apply_mask(out.full, MaskSpec{spec.rho, spec.seed + 1});
  out.masked = std::move(masked.masked);
  out.hidden = std::move(masked.hidden);
  return out;
}

}  // namespace glocal
