#include "glocal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

namespace glocal {

namespace {

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
  throw FormatError("line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

long parse_index(std::string_view tok, std::size_t line, const char* what) {
  tok = trim(tok);
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail_line(line, std::string("bad ") + what + " index '" + std::string(tok) + "'");
  }
  return v;
}

double parse_value(std::string_view tok, std::size_t line) {
  std::string s(trim(tok));
  if (s.empty()) fail_line(line, "empty feature value");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    fail_line(line, "non-numeric feature value '" + s + "'");
  }
  if (!std::isfinite(v)) fail_line(line, "non-finite feature value '" + s + "'");
  return v;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view strip_tag(std::string_view field, std::string_view tag,
                           std::size_t line) {
  field = trim(field);
  if (field.substr(0, tag.size()) != tag) {
    fail_line(line, "expected field starting with '" + std::string(tag) + "'");
  }
  return field.substr(tag.size());
}

// Deterministic permutation of 0..n-1 (Fisher-Yates driven by mt19937_64).
std::vector<Index> shuffled_indices(Index n, Seed seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(pick(rng))]);
  }
  return idx;
}

Index round_half_away(double x) {
  return static_cast<Index>(std::round(x));
}

}  // namespace

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ShapeError("feature matrix must be at least 1x1, got " +
                     shape_string(values_.rows(), values_.cols()));
  }
  if (!values_.allFinite()) throw FormatError("feature matrix has non-finite values");
}

FeatureMatrix FeatureMatrix::columns(const std::vector<Index>& cols) const {
  return FeatureMatrix(values_(Eigen::all, cols));
}

FeatureMatrix FeatureMatrix::with_constant_feature() const {
  Matrix out(values_.rows() + 1, values_.cols());
  out.topRows(values_.rows()) = values_;
  out.row(values_.rows()).setOnes();
  return FeatureMatrix(std::move(out));
}

LabelMatrix::LabelMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 1) {
    throw ShapeError("label matrix needs l >= 2 and n >= 1, got " +
                     shape_string(values_.rows(), values_.cols()));
  }
  for (Index j = 0; j < values_.cols(); ++j) {
    for (Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (v != 0.0 && v != 1.0 && v != -1.0) {
        throw FormatError("label entries must be -1, 0 or +1");
      }
    }
  }
  indicator_ = (values_.array() != 0.0).cast<Scalar>();
}

Index LabelMatrix::observed_count() const {
  return static_cast<Index>(indicator_.sum());
}

LabelMatrix LabelMatrix::columns(const std::vector<Index>& cols) const {
  return LabelMatrix(values_(Eigen::all, cols));
}

Dataset::Dataset(FeatureMatrix x, LabelMatrix y)
    : features(std::move(x)), labels(std::move(y)) {
  if (features.size() != labels.size()) {
    throw ShapeError("features have " + std::to_string(features.size()) +
                     " instances but labels have " +
                     std::to_string(labels.size()));
  }
}

Dataset Dataset::columns(const std::vector<Index>& cols) const {
  return Dataset(features.columns(cols), labels.columns(cols));
}

Dataset parse_gml(std::istream& in) {
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  long n = 0, d = 0, l = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream hs{std::string(t)};
    std::string extra;
    if (!(hs >> n >> d >> l) || (hs >> extra) || n < 1 || d < 1 || l < 1) {
      fail_line(line_no, "malformed header, expected 'n d l' positive integers");
    }
    have_header = true;
    break;
  }
  if (!have_header) throw FormatError("line 1: missing header");
  if (l < 2) fail_line(line_no, "need at least 2 labels");

  Matrix x = Matrix::Zero(d, n);
  Matrix y = Matrix::Zero(l, n);
  long inst = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto t = trim(raw);
    if (t.empty()) continue;
    if (inst >= n) fail_line(line_no, "more instance lines than declared n=" + std::to_string(n));
    const auto fields = split_on(t, '|');
    if (fields.size() != 3) {
      fail_line(line_no, "expected 3 '|'-separated fields, got " +
                             std::to_string(fields.size()));
    }
    std::set<long> seen;
    auto read_labels = [&](std::string_view body, double sign) {
      body = trim(body);
      if (body.empty()) return;
      for (auto tok : split_on(body, ',')) {
        const long idx = parse_index(tok, line_no, "label");
        if (idx < 1 || idx > l) {
          fail_line(line_no, "label index " + std::to_string(idx) +
                                 " out of range 1.." + std::to_string(l));
        }
        if (!seen.insert(idx).second) {
          fail_line(line_no, "duplicate label index " + std::to_string(idx));
        }
        y(idx - 1, inst) = sign;
      }
    };
    read_labels(strip_tag(fields[0], "+:", line_no), 1.0);
    read_labels(strip_tag(fields[1], "-:", line_no), -1.0);

    std::set<long> seen_feat;
    std::istringstream fs{std::string(trim(fields[2]))};
    std::string pair;
    while (fs >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) fail_line(line_no, "feature '" + pair + "' lacks ':'");
      const long f = parse_index(std::string_view(pair).substr(0, colon), line_no, "feature");
      if (f < 1 || f > d) {
        fail_line(line_no, "feature index " + std::to_string(f) +
                               " out of range 1.." + std::to_string(d));
      }
      if (!seen_feat.insert(f).second) {
        fail_line(line_no, "duplicate feature index " + std::to_string(f));
      }
      x(f - 1, inst) = parse_value(std::string_view(pair).substr(colon + 1), line_no);
    }
    ++inst;
  }
  if (inst != n) {
    throw FormatError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(n) + " instance lines, found " +
                      std::to_string(inst));
  }
  return Dataset(FeatureMatrix(std::move(x)), LabelMatrix(std::move(y)));
}

Dataset parse_gml_string(const std::string& text) {
  std::istringstream in(text);
  return parse_gml(in);
}

Dataset read_gml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return parse_gml(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_gml(std::ostream& out, const Dataset& data) {
  const Matrix& x = data.features.values();
  const Matrix& y = data.labels.values();
  out << data.size() << ' ' << data.dim() << ' ' << data.labels_count() << '\n';
  const auto old_prec = out.precision(17);
  for (Index j = 0; j < data.size(); ++j) {
    auto emit = [&](double sign) {
      bool first = true;
      for (Index i = 0; i < y.rows(); ++i) {
        if (y(i, j) != sign) continue;
        if (!first) out << ',';
        out << (i + 1);
        first = false;
      }
    };
    out << "+:";
    emit(1.0);
    out << "|-:";
    emit(-1.0);
    out << '|';
    bool first = true;
    for (Index f = 0; f < x.rows(); ++f) {
      if (x(f, j) == 0.0) continue;
      if (!first) out << ' ';
      out << (f + 1) << ':' << x(f, j);
      first = false;
    }
    out << '\n';
  }
  out.precision(old_prec);
}

std::string write_gml_string(const Dataset& data) {
  std::ostringstream out;
  write_gml(out, data);
  return out.str();
}

MaskResult apply_mask(const Dataset& data, const MaskSpec& spec) {
  if (!(spec.rho >= 0.0 && spec.rho <= 100.0)) {
    throw std::invalid_argument("rho must lie in [0,100], got " + std::to_string(spec.rho));
  }
  const Matrix& y = data.labels.values();
  const Index l = y.rows();
  const Index total = y.size();
  const Index keep = round_half_away(spec.rho / 100.0 * static_cast<double>(total));

  // Column-major linear positions; the first `keep` of a seeded permutation stay.
  const auto order = shuffled_indices(total, spec.seed);
  std::vector<bool> kept(static_cast<std::size_t>(total), false);
  for (Index p = 0; p < keep; ++p) kept[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = true;

  Matrix masked = y;
  MaskResult result;
  for (Index j = 0; j < y.cols(); ++j) {
    for (Index i = 0; i < l; ++i) {
      if (kept[static_cast<std::size_t>(j * l + i)]) continue;
      if (y(i, j) != 0.0) {
        result.hidden.push_back({i, j, static_cast<int>(y(i, j))});
      }
      masked(i, j) = 0.0;
    }
  }
  result.masked = Dataset(data.features, LabelMatrix(std::move(masked)));
  return result;
}

SplitResult split(const Dataset& data, double train_fraction, Seed seed) {
  const Index n = data.size();
  if (n < 2) throw std::invalid_argument("split needs at least 2 instances");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0,1)");
  }
  const Index n_train = round_half_away(train_fraction * static_cast<double>(n));
  if (n_train < 1 || n_train >= n) {
    throw std::invalid_argument("train fraction " + std::to_string(train_fraction) +
                                " leaves one side empty for n=" + std::to_string(n));
  }
  auto order = shuffled_indices(n, seed);
  SplitResult out;
  out.train_columns.assign(order.begin(), order.begin() + n_train);
  out.test_columns.assign(order.begin() + n_train, order.end());
  std::sort(out.train_columns.begin(), out.train_columns.end());
  std::sort(out.test_columns.begin(), out.test_columns.end());
  out.train = data.columns(out.train_columns);
  out.test = data.columns(out.test_columns);
  return out;
}

void write_hidden(std::ostream& out, const std::vector<HiddenEntry>& hidden) {
  for (const auto& h : hidden) {
    out << (h.label + 1) << ' ' << (h.instance + 1) << ' ' << h.value << '\n';
  }
}

std::vector<HiddenEntry> read_hidden(std::istream& in) {
  std::vector<HiddenEntry> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls{std::string(t)};
    long label = 0, inst = 0;
    int value = 0;
    std::string extra;
    if (!(ls >> label >> inst >> value) || (ls >> extra) || label < 1 || inst < 1 ||
        (value != 1 && value != -1)) {
      fail_line(line_no, "expected 'label_idx instance_idx value' with value +-1");
    }
    out.push_back({label - 1, inst - 1, value});
  }
  return out;
}

Matrix hidden_truth(const std::vector<HiddenEntry>& hidden, Index labels,
                    Index instances) {
  Matrix truth = Matrix::Zero(labels, instances);
  for (const auto& h : hidden) {
    if (h.label < 0 || h.label >= labels || h.instance < 0 || h.instance >= instances) {
      throw ShapeError("hidden entry (" + std::to_string(h.label + 1) + "," +
                       std::to_string(h.instance + 1) + ") outside " +
                       shape_string(labels, instances));
    }
    truth(h.label, h.instance) = h.value;
  }
  return truth;
}

}  // namespace glocal
