#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "glocal/metrics.hpp"
#include "oracles.hpp"

using namespace glocal;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

struct Case {
  Matrix scores, truth;
};

// Distinct scores (a random permutation of 1..l*p, scaled) and random +-1 truth.
Case random_case(std::mt19937_64& rng, bool distinct, bool with_unknown = false) {
  std::uniform_int_distribution<Index> dim(1, 6);
  const Index l = std::max<Index>(2, dim(rng)), p = dim(rng);
  Case c{Matrix(l, p), Matrix(l, p)};
  std::vector<double> vals(static_cast<std::size_t>(l * p));
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = distinct ? 0.37 * static_cast<double>(i) - 2.0 : static_cast<double>(i % 3);
  std::shuffle(vals.begin(), vals.end(), rng);
  std::uniform_int_distribution<int> t(with_unknown ? -1 : 0, 1);
  for (Index i = 0; i < l; ++i)
    for (Index j = 0; j < p; ++j) {
      c.scores(i, j) = vals[static_cast<std::size_t>(i * p + j)];
      const int v = t(rng);
      c.truth(i, j) = with_unknown ? v : (v ? 1.0 : -1.0);
    }
  return c;
}

template <typename F>
bool defined(F f) {
  try {
    f();
    return true;
  } catch (const UndefinedMetric&) {
    return false;
  }
}

}  // namespace

TEST(RankingLoss, Examples) {
  EXPECT_EQ(ranking_loss(col({0.9, 0.5, 0.2}), col({1, -1, -1})), 0.0);
  EXPECT_EQ(ranking_loss(col({0.3, 0.5, 0.2}), col({1, -1, -1})), 0.5);
  EXPECT_EQ(ranking_loss(col({0.4, 0.4, 0.4}), col({1, -1, -1})), 1.0);
  EXPECT_THROW(ranking_loss(col({0.1, 0.2}), col({1, 1})), UndefinedMetric);
}

TEST(AverageAuc, Examples) {
  Matrix s(1, 2), t(1, 2);
  s << 1, 0;
  t << 1, -1;
  EXPECT_EQ(average_auc(s, t), 1.0);

  Matrix s3(1, 3), t3(1, 3);
  s3 << 0.8, 0.3, 0.9;
  t3 << 1, -1, -1;
  EXPECT_EQ(average_auc(s3, t3), 0.5);

  // Ties count for AUC.
  s3 << 0.5, 0.5, 0.5;
  EXPECT_EQ(average_auc(s3, t3), 1.0);

  // Second label is all positive and is skipped.
  Matrix s2(2, 2), t2(2, 2);
  s2 << 1, 0, 0.3, 0.1;
  t2 << 1, -1, 1, 1;
  EXPECT_EQ(average_auc(s2, t2), 1.0);
  EXPECT_EQ(evaluate(s2, t2).skipped_labels, 1);
  EXPECT_THROW(average_auc(Matrix::Ones(2, 2), Matrix::Ones(2, 2)), UndefinedMetric);
}

TEST(Coverage, Examples) {
  EXPECT_EQ(coverage(col({0.9, 0.5, 0.2}), col({1, -1, -1})), 0.0);
  EXPECT_EQ(coverage(col({0.9, 0.5, 0.2}), col({1, -1, 1})), 2.0);
  EXPECT_EQ(coverage(col({0.1, 0.9, 0.5, 0.2}), col({1, 1, 1, 1})), 3.0);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision(col({0.9, 0.8, 0.2}), col({1, 1, -1})), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(col({0.9, 0.5, 0.2}), col({1, -1, 1})), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(average_precision(col({0.9, 0.5, 0.2, 0.1}), col({-1, -1, -1, 1})), 0.25);
}

TEST(Ranks, TiesBrokenByLabelIndex) {
  const Vector s = (Vector(4) << 0.5, 0.9, 0.5, 0.1).finished();
  const auto r = label_ranks(s);
  EXPECT_EQ(r, (std::vector<Index>{2, 1, 3, 4}));
}

TEST(Evaluate, PerfectScores) {
  Matrix t(3, 2), s(3, 2);
  t << 1, -1, 1, 1, -1, -1;
  s = t;
  const auto r = evaluate(s, t);
  EXPECT_EQ(r.rkl, 0.0);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.ap, 1.0);
  // mean(|C+| - 1) = (1 + 0) / 2
  EXPECT_EQ(r.cvg, 0.5);
}

TEST(Evaluate, MatchesIndividualMetrics) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Case c = random_case(rng, true);
    if (!defined([&] { evaluate(c.scores, c.truth); })) continue;
    const auto r = evaluate(c.scores, c.truth);
    EXPECT_EQ(r.rkl, ranking_loss(c.scores, c.truth));
    EXPECT_EQ(r.auc, average_auc(c.scores, c.truth));
    EXPECT_EQ(r.cvg, coverage(c.scores, c.truth));
    EXPECT_EQ(r.ap, average_precision(c.scores, c.truth));
  }
}

TEST(Evaluate, ExactAgreementWithBruteForce) {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    // Alternate distinct scores, tied scores, and truth with unknown entries.
    const Case c = random_case(rng, rep % 3 != 1, rep % 3 == 2);
    auto check = [&](auto metric, double expected) {
      if (std::isnan(expected)) {
        EXPECT_THROW(metric(c.scores, c.truth), UndefinedMetric);
      } else {
        EXPECT_EQ(metric(c.scores, c.truth), expected);
      }
    };
    check(ranking_loss, oracle::brute_rkl(c.scores, c.truth));
    check(average_auc, oracle::brute_auc(c.scores, c.truth));
    check(coverage, oracle::brute_cvg(c.scores, c.truth));
    check(average_precision, oracle::brute_ap(c.scores, c.truth));
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Properties, RangesMonotoneTransformAndExchangeability) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 300; ++rep) {
    const Case c = random_case(rng, true);
    if (!defined([&] { evaluate(c.scores, c.truth); })) continue;
    const auto r = evaluate(c.scores, c.truth);
    EXPECT_GE(r.rkl, 0.0);
    EXPECT_LE(r.rkl, 1.0);
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    EXPECT_GE(r.ap, 0.0);
    EXPECT_LE(r.ap, 1.0);
    EXPECT_GE(r.cvg, 0.0);
    EXPECT_LE(r.cvg, static_cast<double>(c.scores.rows() - 1));

    const Matrix transformed = c.scores.unaryExpr([](double v) { return std::exp(v) * 3.0 + 1.0; });
    const auto rt = evaluate(transformed, c.truth);
    EXPECT_EQ(rt.rkl, r.rkl);
    EXPECT_EQ(rt.auc, r.auc);
    EXPECT_EQ(rt.cvg, r.cvg);
    EXPECT_EQ(rt.ap, r.ap);

    if (c.scores.cols() >= 2) {
      Matrix s = c.scores, t = c.truth;
      s.col(0).swap(s.col(s.cols() - 1));
      t.col(0).swap(t.col(t.cols() - 1));
      const auto rs = evaluate(s, t);
      EXPECT_NEAR(rs.rkl, r.rkl, 1e-15);
      EXPECT_NEAR(rs.auc, r.auc, 1e-15);
      EXPECT_NEAR(rs.cvg, r.cvg, 1e-15);
      EXPECT_NEAR(rs.ap, r.ap, 1e-15);
    }
  }
}

TEST(Report, Csv) {
  EvaluationReport r{0.25, 0.75, 1.5, 0.5, 2, 1};
  std::stringstream s;
  write_report_csv(s, r);
  EXPECT_EQ(s.str(), "rkl,auc,cvg,ap,skipped_instances,skipped_labels\n0.25,0.75,1.5,0.5,2,1\n");
}

TEST(Inputs, Validation) {
  EXPECT_THROW(ranking_loss(col({0.1, 0.2}), col({2, -1})), std::invalid_argument);
  EXPECT_THROW(ranking_loss(col({0.1, 0.2}), Matrix::Ones(3, 1)), ShapeError);
}
