#pragma once

#include <iosfwd>
#include <vector>

#include "glocal/dataset.hpp"

namespace glocal {

/// Assignment of n instances to g non-empty groups. Group ids are 0-based in
/// memory and 1-based in partition files.
struct Partition {
  Index groups = 0;
  std::vector<Index> assignment;  // length n, values in [0, groups)
  std::vector<Index> sizes;       // n_m, all >= 1
  Matrix centroids;               // g x d; empty for user-supplied partitions

  Index size() const { return static_cast<Index>(assignment.size()); }
  /// Column indices belonging to group m, ascending.
  std::vector<Index> members(Index m) const;
  /// Builds a partition from raw assignments, validating coverage.
  static Partition from_assignment(std::vector<Index> assignment, Index groups);

  bool operator==(const Partition& other) const = default;
};

struct KMeansOptions {
  Index groups = 1;
  Seed seed = 0;
  int max_iter = 100;
};

struct KMeansResult {
  Partition partition;
  std::vector<double> sse_trace;  // SSE after each Lloyd iteration
  int iterations = 0;
};

/// Within-cluster sum of squared Euclidean distances for given centroids.
double within_cluster_sse(const FeatureMatrix& features, const Partition& p);

/// Seeded k-means++ initialisation followed by Lloyd iterations until the
/// assignment stops changing or max_iter is hit.
KMeansResult kmeans(const FeatureMatrix& features, const KMeansOptions& opts);

// `instance_idx group_idx` lines, 1-based.
void write_partition(std::ostream& out, const Partition& p);
Partition read_partition(std::istream& in);

}  // namespace glocal
