#pragma once

#include <iosfwd>
#include <stdexcept>

#include "glocal/types.hpp"

namespace glocal {

// Ranking metrics over an l x p score matrix (labels as rows, instances as
// columns) and a truth matrix of the same shape. Truth entries are +1, -1, or
// 0 for "unknown"; unknown entries join neither the positive nor the negative
// set but still occupy a place in the label ranking.
//
// Tie handling is deliberately asymmetric: a positive/negative label pair with
// equal scores counts as mis-ordered for ranking loss, while a positive/
// negative instance pair with equal scores counts as correctly ordered for
// AUC. Label ranks break score ties by ascending label index.

/// Raised when every instance (or label) is degenerate for a metric.
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mean over instances of the fraction of (positive, negative) label pairs
/// whose positive score is <= the negative score. Instances lacking either
/// side are skipped.
double ranking_loss(const Matrix& scores, const Matrix& truth);

/// Mean over labels of the fraction of (positive, negative) instance pairs
/// whose positive score is >= the negative score. Labels lacking either side
/// are skipped.
double average_auc(const Matrix& scores, const Matrix& truth);

/// Mean over instances of (deepest rank of a positive label) - 1.
double coverage(const Matrix& scores, const Matrix& truth);

double average_precision(const Matrix& scores, const Matrix& truth);

/// 1-based ranks of the labels of one instance, descending score.
std::vector<Index> label_ranks(const Eigen::Ref<const Vector>& scores);

struct EvaluationReport {
  double rkl = 0.0;
  double auc = 0.0;
  double cvg = 0.0;
  double ap = 0.0;
  Index skipped_instances = 0;  // instances without both a positive and a negative
  Index skipped_labels = 0;     // labels without both a positive and a negative instance
};

EvaluationReport evaluate(const Matrix& scores, const Matrix& truth);

/// `rkl,auc,cvg,ap,skipped_instances,skipped_labels` header plus one row.
void write_report_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace glocal
