#include "glocal/model.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace glocal {

void Hyperparams::validate() const {
  if (!(lambda >= 0 && lambda2 >= 0 && lambda3 >= 0 && lambda4 >= 0)) {
    throw std::invalid_argument("lambda, lambda2, lambda3, lambda4 must be >= 0");
  }
  if (k < 1) throw std::invalid_argument("latent dimension k must be >= 1");
  if (g < 1) throw std::invalid_argument("group count g must be >= 1");
  if (outer_iters < 0 || warm_iters < 0 || inner_steps < 1) {
    throw std::invalid_argument("iteration counts must be non-negative, inner_steps >= 1");
  }
  if (!(tol >= 0)) throw std::invalid_argument("tol must be >= 0");
}

void GlocalModel::validate() const {
  const Index l = U.rows(), k = U.cols();
  if (l < 1 || k < 1) throw ShapeError("model: U must be non-empty");
  require_shape(W, W.rows(), k, "model W");
  if (V.size() > 0) require_shape(V, k, V.cols(), "model V");
  for (const auto& z : factors) require_shape(z, l, k, "model factor");
  auto finite = [](const Matrix& m) { return m.allFinite(); };
  if (!finite(U) || !finite(V) || !finite(W)) throw FormatError("model has non-finite values");
  for (const auto& z : factors) {
    if (!finite(z)) throw FormatError("model factor has non-finite values");
  }
}

Matrix score(const GlocalModel& model, const Matrix& features) {
  if (features.rows() != model.dim()) {
    throw ShapeError("score: model expects d=" + std::to_string(model.dim()) +
                     " features, got " + std::to_string(features.rows()));
  }
  return model.U * (model.W.transpose() * features);
}

Matrix score(const GlocalModel& model, const FeatureMatrix& features) {
  return score(model, features.values());
}

Matrix predict(const GlocalModel& model, const FeatureMatrix& features) {
  return sign_labels(score(model, features));
}

namespace {

void write_block(std::ostream& out, const std::string& name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

// Reads whitespace tokens, skipping '#' comment lines.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (!(line_ >> tok)) {
      std::string raw;
      if (!std::getline(in_, raw)) return false;
      ++line_no_;
      if (!raw.empty() && raw.front() == '#') raw.clear();
      line_.clear();
      line_.str(raw);
    }
    return true;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::istringstream line_;
  std::size_t line_no_ = 0;
};

long read_count(TokenReader& r, const char* what) {
  std::string tok;
  if (!r.next(tok)) throw FormatError(std::string("model: missing ") + what);
  long v = -1;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || v < 0) {
    throw FormatError("model line " + std::to_string(r.line()) + ": bad " + what +
                      " '" + tok + "'");
  }
  return v;
}

Matrix read_block(TokenReader& r, const std::string& name, long rows, long cols) {
  std::string tok;
  if (!r.next(tok)) {
    throw FormatError("model: expected block " + name + " but file ended");
  }
  if (tok != name) {
    throw FormatError("model line " + std::to_string(r.line()) + ": expected block " +
                      name + ", found '" + tok + "'");
  }
  const long hr = read_count(r, "rows");
  const long hc = read_count(r, "cols");
  if ((rows >= 0 && hr != rows) || (cols >= 0 && hc != cols)) {
    throw FormatError("model: block " + name + " has shape " + shape_string(hr, hc) +
                      ", expected " + shape_string(rows >= 0 ? rows : hr, cols >= 0 ? cols : hc));
  }
  Matrix m(hr, hc);
  const long expected = hr * hc;
  for (long t = 0; t < expected; ++t) {
    if (!r.next(tok)) {
      throw FormatError("model: block " + name + " expected " + std::to_string(expected) +
                        " values, found " + std::to_string(t));
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      throw FormatError("model line " + std::to_string(r.line()) + ": bad value '" + tok + "'");
    }
    if (!std::isfinite(v)) {
      throw FormatError("model line " + std::to_string(r.line()) + ": non-finite value in " + name);
    }
    m(t / hc, t % hc) = v;
  }
  return m;
}

}  // namespace

void save_model(std::ostream& out, const GlocalModel& model,
                const std::vector<std::string>& comments) {
  model.validate();
  out << kModelMagic << '\n';
  for (const auto& c : comments) out << "# " << c << '\n';
  out << model.labels() << ' ' << model.dim() << ' ' << model.latent() << ' '
      << model.groups() << '\n';
  const auto old = out.precision(17);
  write_block(out, "U", model.U);
  write_block(out, "W", model.W);
  write_block(out, "V", model.V);
  for (std::size_t m = 0; m < model.factors.size(); ++m) {
    write_block(out, "Z_" + std::to_string(m + 1), model.factors[m]);
  }
  out.precision(old);
}

GlocalModel load_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) throw FormatError("model: empty file");
  if (!magic.empty() && magic.back() == '\r') magic.pop_back();
  if (magic != kModelMagic) {
    if (magic.rfind("GLOCAL-MODEL ", 0) == 0) {
      throw FormatError("model: unsupported version '" + magic.substr(13) +
                        "', this build reads " + kModelMagic);
    }
    throw FormatError("model: missing magic line '" + std::string(kModelMagic) + "'");
  }
  TokenReader r(in);
  const long l = read_count(r, "l");
  const long d = read_count(r, "d");
  const long k = read_count(r, "k");
  const long g = read_count(r, "g");
  GlocalModel model;
  model.U = read_block(r, "U", l, k);
  model.W = read_block(r, "W", d, k);
  model.V = read_block(r, "V", k, -1);
  for (long m = 0; m < g; ++m) {
    model.factors.push_back(read_block(r, "Z_" + std::to_string(m + 1), l, k));
  }
  std::string extra;
  if (r.next(extra)) throw FormatError("model: trailing data '" + extra + "'");
  model.validate();
  return model;
}

void write_dense(std::ostream& out, const Matrix& m, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << m.rows() << ' ' << m.cols() << '\n';
  const auto old = out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

Matrix read_dense(std::istream& in) {
  TokenReader r(in);
  const long rows = read_count(r, "rows");
  const long cols = read_count(r, "cols");
  Matrix m(rows, cols);
  std::string tok;
  for (long t = 0; t < rows * cols; ++t) {
    if (!r.next(tok)) {
      throw FormatError("matrix: expected " + std::to_string(rows * cols) +
                        " values, found " + std::to_string(t));
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
      throw FormatError("matrix line " + std::to_string(r.line()) + ": bad value '" + tok + "'");
    }
    m(t / cols, t % cols) = v;
  }
  if (r.next(tok)) throw FormatError("matrix: trailing data '" + tok + "'");
  return m;
}

}  // namespace glocal
