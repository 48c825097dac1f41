#include "glocal/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <vector>

namespace glocal {

namespace {

void check_inputs(const Matrix& scores, const Matrix& truth) {
  require_shape(truth, scores.rows(), scores.cols(), "metrics truth");
  for (Index j = 0; j < truth.cols(); ++j) {
    for (Index i = 0; i < truth.rows(); ++i) {
      const double t = truth(i, j);
      if (t != 1.0 && t != -1.0 && t != 0.0) {
        throw std::invalid_argument("metrics: truth entries must be -1, 0 or +1");
      }
    }
  }
  if (!scores.allFinite()) throw std::invalid_argument("metrics: scores must be finite");
}

// Number of values in sorted `v` that are <= x / < x.
Index count_le(const std::vector<double>& sorted, double x) {
  return std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
}

struct Split {
  std::vector<double> pos;
  std::vector<double> neg;
};

Split split_column(const Matrix& scores, const Matrix& truth, Index col) {
  Split s;
  for (Index i = 0; i < scores.rows(); ++i) {
    if (truth(i, col) > 0) s.pos.push_back(scores(i, col));
    else if (truth(i, col) < 0) s.neg.push_back(scores(i, col));
  }
  return s;
}

// Per-instance ranking loss, or a negative value when skipped.
double instance_rkl(const Matrix& scores, const Matrix& truth, Index col) {
  Split s = split_column(scores, truth, col);
  if (s.pos.empty() || s.neg.empty()) return -1.0;
  std::sort(s.neg.begin(), s.neg.end());
  Index bad = 0;
  // f(pos) <= f(neg)  <=>  neg >= pos
  for (double p : s.pos) {
    bad += static_cast<Index>(s.neg.size()) -
           (std::lower_bound(s.neg.begin(), s.neg.end(), p) - s.neg.begin());
  }
  return static_cast<double>(bad) /
         (static_cast<double>(s.pos.size()) * static_cast<double>(s.neg.size()));
}

double label_auc(const Matrix& scores, const Matrix& truth, Index label) {
  std::vector<double> pos, neg;
  for (Index j = 0; j < scores.cols(); ++j) {
    if (truth(label, j) > 0) pos.push_back(scores(label, j));
    else if (truth(label, j) < 0) neg.push_back(scores(label, j));
  }
  if (pos.empty() || neg.empty()) return -1.0;
  std::sort(neg.begin(), neg.end());
  Index good = 0;
  for (double p : pos) good += count_le(neg, p);
  return static_cast<double>(good) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

std::vector<Index> label_ranks(const Eigen::Ref<const Vector>& scores) {
  const Index l = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(l));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) > scores(b); });
  std::vector<Index> rank(static_cast<std::size_t>(l));
  for (Index r = 0; r < l; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r + 1;
  return rank;
}

double ranking_loss(const Matrix& scores, const Matrix& truth) {
  check_inputs(scores, truth);
  double sum = 0.0;
  Index used = 0;
  for (Index j = 0; j < scores.cols(); ++j) {
    const double v = instance_rkl(scores, truth, j);
    if (v < 0) continue;
    sum += v;
    ++used;
  }
  if (used == 0) throw UndefinedMetric("ranking loss: no instance has both positive and negative labels");
  return sum / static_cast<double>(used);
}

double average_auc(const Matrix& scores, const Matrix& truth) {
  check_inputs(scores, truth);
  double sum = 0.0;
  Index used = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    const double v = label_auc(scores, truth, i);
    if (v < 0) continue;
    sum += v;
    ++used;
  }
  if (used == 0) throw UndefinedMetric("average AUC: no label has both positive and negative instances");
  return sum / static_cast<double>(used);
}

double coverage(const Matrix& scores, const Matrix& truth) {
  check_inputs(scores, truth);
  double sum = 0.0;
  Index used = 0;
  for (Index j = 0; j < scores.cols(); ++j) {
    const auto rank = label_ranks(scores.col(j));
    Index deepest = 0;
    for (Index i = 0; i < scores.rows(); ++i) {
      if (truth(i, j) > 0) deepest = std::max(deepest, rank[static_cast<std::size_t>(i)]);
    }
    if (deepest == 0) continue;
    sum += static_cast<double>(deepest - 1);
    ++used;
  }
  if (used == 0) throw UndefinedMetric("coverage: no instance has a positive label");
  return sum / static_cast<double>(used);
}

double average_precision(const Matrix& scores, const Matrix& truth) {
  check_inputs(scores, truth);
  double sum = 0.0;
  Index used = 0;
  for (Index j = 0; j < scores.cols(); ++j) {
    const auto rank = label_ranks(scores.col(j));
    std::vector<Index> pos_ranks;
    for (Index i = 0; i < scores.rows(); ++i) {
      if (truth(i, j) > 0) pos_ranks.push_back(rank[static_cast<std::size_t>(i)]);
    }
    if (pos_ranks.empty()) continue;
    std::vector<Index> sorted = pos_ranks;
    std::sort(sorted.begin(), sorted.end());
    double inst = 0.0;
    for (Index rc : pos_ranks) {
      const auto above = std::upper_bound(sorted.begin(), sorted.end(), rc) - sorted.begin();
      inst += static_cast<double>(above) / static_cast<double>(rc);
    }
    sum += inst / static_cast<double>(pos_ranks.size());
    ++used;
  }
  if (used == 0) throw UndefinedMetric("average precision: no instance has a positive label");
  return sum / static_cast<double>(used);
}

EvaluationReport evaluate(const Matrix& scores, const Matrix& truth) {
  EvaluationReport r;
  r.rkl = ranking_loss(scores, truth);
  r.auc = average_auc(scores, truth);
  r.cvg = coverage(scores, truth);
  r.ap = average_precision(scores, truth);
  for (Index j = 0; j < truth.cols(); ++j) {
    const bool pos = (truth.col(j).array() > 0).any();
    const bool neg = (truth.col(j).array() < 0).any();
    if (!pos || !neg) ++r.skipped_instances;
  }
  for (Index i = 0; i < truth.rows(); ++i) {
    const bool pos = (truth.row(i).array() > 0).any();
    const bool neg = (truth.row(i).array() < 0).any();
    if (!pos || !neg) ++r.skipped_labels;
  }
  return r;
}

void write_report_csv(std::ostream& out, const EvaluationReport& r) {
  const auto old = out.precision(17);
  out << "rkl,auc,cvg,ap,skipped_instances,skipped_labels\n";
  out << r.rkl << ',' << r.auc << ',' << r.cvg << ',' << r.ap << ',' << r.skipped_instances
      << ',' << r.skipped_labels << '\n';
  out.precision(old);
}

}  // namespace glocal
