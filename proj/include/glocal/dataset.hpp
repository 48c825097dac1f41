#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "glocal/types.hpp"

namespace glocal {

/// d x n instance matrix; column i is instance x_i. All values finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix values);

  Index dim() const { return values_.rows(); }
  Index size() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

  FeatureMatrix columns(const std::vector<Index>& cols) const;
  /// Appends a constant 1 row (bias feature).
  FeatureMatrix with_constant_feature() const;

  bool operator==(const FeatureMatrix& other) const {
    return values_ == other.values_;
  }

 private:
  Matrix values_;
};

/// l x n three-state label matrix: +1 positive, -1 negative, 0 missing.
/// The observation indicator J is the nonzero support of the values.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  explicit LabelMatrix(Matrix values);

  Index labels() const { return values_.rows(); }
  Index size() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  const Matrix& indicator() const { return indicator_; }
  Index observed_count() const;

  LabelMatrix columns(const std::vector<Index>& cols) const;

  bool operator==(const LabelMatrix& other) const {
    return values_ == other.values_;
  }

 private:
  Matrix values_;
  Matrix indicator_;
};

struct Dataset {
  FeatureMatrix features;
  LabelMatrix labels;

  Dataset() = default;
  Dataset(FeatureMatrix x, LabelMatrix y);

  Index size() const { return features.size(); }
  Index dim() const { return features.dim(); }
  Index labels_count() const { return labels.labels(); }

  Dataset columns(const std::vector<Index>& cols) const;

  bool operator==(const Dataset& other) const = default;
};

struct MaskSpec {
  double rho = 100.0;  // percentage of label positions kept observed
  Seed seed = 0;
};

struct HiddenEntry {
  Index label = 0;
  Index instance = 0;
  int value = 0;

  bool operator==(const HiddenEntry& other) const = default;
};

struct MaskResult {
  Dataset masked;
  std::vector<HiddenEntry> hidden;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<Index> train_columns;
  std::vector<Index> test_columns;
};

// GML text format. Leading lines starting with '#' are comments.
Dataset parse_gml(std::istream& in);
Dataset parse_gml_string(const std::string& text);
Dataset read_gml_file(const std::string& path);
void write_gml(std::ostream& out, const Dataset& data);
std::string write_gml_string(const Dataset& data);

/// Keeps round(rho/100 * l * n) positions observed, chosen uniformly without
/// replacement over all positions; everything else becomes missing.
MaskResult apply_mask(const Dataset& data, const MaskSpec& spec);

/// Random disjoint column split with round(train_fraction * n) training
/// columns. Column order inside each side follows the original order.
SplitResult split(const Dataset& data, double train_fraction, Seed seed);

// Sidecar with one `label_idx instance_idx value` line per hidden entry
// (1-based indices).
void write_hidden(std::ostream& out, const std::vector<HiddenEntry>& hidden);
std::vector<HiddenEntry> read_hidden(std::istream& in);

/// l x n matrix with the hidden values at their positions and 0 elsewhere.
Matrix hidden_truth(const std::vector<HiddenEntry>& hidden, Index labels,
                    Index instances);

}  // namespace glocal
