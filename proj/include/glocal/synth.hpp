#pragma once

#include "glocal/dataset.hpp"

namespace glocal {

/// Planted low-rank multi-label problem:
/// X ~ N(0,1) (d x n), U* (l x k), W* (d x k) ~ N(0,1),
/// Y = sign(U* W*^T X + noise * N(0,1)) with sign(0) = -1, then masked.
struct SynthSpec {
  Index labels = 20;
  Index instances = 400;
  Index dim = 10;
  Index latent = 3;
  double noise = 0.0;
  double rho = 100.0;
  Seed seed = 0;
};

struct SynthData {
  Dataset full;
  Dataset masked;
  std::vector<HiddenEntry> hidden;
  Matrix planted_scores;  // U* W*^T X before noise
};

SynthData synthesize(const SynthSpec& spec);

}  // namespace glocal
