#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "glocal/clustering.hpp"
#include "oracles.hpp"

using namespace glocal;

TEST(KMeans, SingleGroupIsColumnMean) {
  std::mt19937_64 rng(2);
  const FeatureMatrix x(oracle::random_matrix(3, 12, rng));
  const auto r = kmeans(x, {1, 0, 100});
  EXPECT_EQ(r.partition.groups, 1);
  EXPECT_EQ(r.partition.sizes[0], 12);
  EXPECT_LT((r.partition.centroids.row(0).transpose() - x.values().rowwise().mean()).norm(), 1e-12);
}

TEST(KMeans, SeparatedClouds) {
  std::mt19937_64 rng(4);
  Matrix x(2, 20);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (Index j = 0; j < 20; ++j) {
    const double c = j < 10 ? 0.0 : 10.0;
    x(0, j) = c + noise(rng);
    x(1, j) = c + noise(rng);
  }
  for (Seed s = 0; s < 5; ++s) {
    const auto r = kmeans(FeatureMatrix(x), {2, s, 100});
    const auto& a = r.partition.assignment;
    for (Index j = 1; j < 10; ++j) EXPECT_EQ(a[static_cast<std::size_t>(j)], a[0]);
    for (Index j = 11; j < 20; ++j) EXPECT_EQ(a[static_cast<std::size_t>(j)], a[10]);
    EXPECT_NE(a[0], a[10]);
    const Vector m0 = x.leftCols(10).rowwise().mean();
    EXPECT_LT((r.partition.centroids.row(a[0]).transpose() - m0).norm(), 1e-12);
  }
}

TEST(KMeans, OneGroupPerInstance) {
  std::mt19937_64 rng(8);
  const FeatureMatrix x(oracle::random_matrix(2, 7, rng));
  const auto r = kmeans(x, {7, 1, 100});
  for (auto s : r.partition.sizes) EXPECT_EQ(s, 1);
  EXPECT_EQ(within_cluster_sse(x, r.partition), 0.0);
}

TEST(KMeans, DuplicatePointsStillFillEveryGroup) {
  Matrix x = Matrix::Zero(2, 6);
  x(0, 5) = 1.0;
  const auto r = kmeans(FeatureMatrix(x), {4, 3, 100});
  for (auto s : r.partition.sizes) EXPECT_GE(s, 1);
}

TEST(KMeans, MatchesExhaustiveTwoGroupOptimum) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(2, 6);
  for (int rep = 0; rep < 40; ++rep) {
    const Index n1 = size(rng), n2 = 8 - n1;
    Matrix x(2, n1 + n2);
    std::normal_distribution<double> noise(0.0, 1.0);
    Vector shift = oracle::random_matrix(2, 1, rng);
    shift *= 8.0 / shift.norm();
    for (Index j = 0; j < n1 + n2; ++j) {
      x.col(j) << noise(rng), noise(rng);
      if (j >= n1) x.col(j) += shift;
    }
    const auto r = kmeans(FeatureMatrix(x), {2, static_cast<Seed>(rep), 100});
    EXPECT_NEAR(r.sse_trace.back(), oracle::brute_two_means_sse(x), 1e-9) << "rep " << rep;
  }
}

TEST(KMeans, NeverBeatsExhaustiveOptimum) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 40; ++rep) {
    const Matrix x = oracle::random_matrix(3, 8, rng);
    const auto r = kmeans(FeatureMatrix(x), {2, static_cast<Seed>(rep), 100});
    EXPECT_GE(r.sse_trace.back(), oracle::brute_two_means_sse(x) - 1e-9);
  }
}

TEST(KMeans, SseNonIncreasingAndDeterministic) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const FeatureMatrix x(oracle::random_matrix(4, 60, rng));
    const auto r = kmeans(x, {5, static_cast<Seed>(rep), 100});
    for (std::size_t t = 1; t < r.sse_trace.size(); ++t) {
      EXPECT_LE(r.sse_trace[t], r.sse_trace[t - 1] + 1e-12);
    }
    Index total = 0;
    for (Index m = 0; m < r.partition.groups; ++m) {
      EXPECT_EQ(static_cast<Index>(r.partition.members(m).size()),
                r.partition.sizes[static_cast<std::size_t>(m)]);
      total += r.partition.sizes[static_cast<std::size_t>(m)];
    }
    EXPECT_EQ(total, 60);
    EXPECT_EQ(kmeans(x, {5, static_cast<Seed>(rep), 100}).partition, r.partition);
  }
}

TEST(KMeans, RejectsBadGroupCounts) {
  const FeatureMatrix x(Matrix::Ones(2, 3));
  EXPECT_THROW(kmeans(x, {0, 0, 10}), std::invalid_argument);
  EXPECT_THROW(kmeans(x, {4, 0, 10}), std::invalid_argument);
}

TEST(PartitionFile, RoundTripAndErrors) {
  const Partition p = Partition::from_assignment({0, 1, 1, 0, 2}, 3);
  std::stringstream s;
  write_partition(s, p);
  EXPECT_EQ(s.str(), "1 1\n2 2\n3 2\n4 1\n5 3\n");
  EXPECT_EQ(read_partition(s), p);

  std::stringstream dup("1 1\n1 2\n");
  EXPECT_THROW(read_partition(dup), FormatError);
  std::stringstream gap("1 1\n3 1\n");
  EXPECT_THROW(read_partition(gap), FormatError);
  std::stringstream empty_group("1 1\n2 3\n");
  EXPECT_THROW(read_partition(empty_group), FormatError);
}
