#include "glocal/clustering.hpp"

#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace glocal {

namespace {

Matrix centroids_of(const Matrix& x, const std::vector<Index>& assign, Index g) {
  Matrix c = Matrix::Zero(g, x.rows());
  std::vector<Index> count(static_cast<std::size_t>(g), 0);
  for (Index i = 0; i < x.cols(); ++i) {
    const auto m = assign[static_cast<std::size_t>(i)];
    c.row(m) += x.col(i).transpose();
    ++count[static_cast<std::size_t>(m)];
  }
  for (Index m = 0; m < g; ++m) {
    if (count[static_cast<std::size_t>(m)] > 0) {
      c.row(m) /= static_cast<double>(count[static_cast<std::size_t>(m)]);
    }
  }
  return c;
}

double sse_of(const Matrix& x, const std::vector<Index>& assign, const Matrix& c) {
  double s = 0.0;
  for (Index i = 0; i < x.cols(); ++i) {
    s += (x.col(i) - c.row(assign[static_cast<std::size_t>(i)]).transpose()).squaredNorm();
  }
  return s;
}

Matrix plus_plus_seeds(const Matrix& x, Index g, std::mt19937_64& rng) {
  const Index n = x.cols();
  Matrix c(g, x.rows());
  std::uniform_int_distribution<Index> first(0, n - 1);
  c.row(0) = x.col(first(rng)).transpose();
  Vector d2(n);
  for (Index i = 0; i < n; ++i) d2(i) = (x.col(i) - c.row(0).transpose()).squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index m = 1; m < g; ++m) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double r = unif(rng) * total;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        r -= d2(i);
        if (r < 0.0 && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with existing seeds.
      pick = first(rng);
    }
    c.row(m) = x.col(pick).transpose();
    for (Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (x.col(i) - c.row(m).transpose()).squaredNorm());
    }
  }
  return c;
}

// Nearest centroid; ties go to the lowest group index.
std::vector<Index> assign_nearest(const Matrix& x, const Matrix& c) {
  std::vector<Index> a(static_cast<std::size_t>(x.cols()));
  for (Index i = 0; i < x.cols(); ++i) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index m = 0; m < c.rows(); ++m) {
      const double dist = (x.col(i) - c.row(m).transpose()).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = m;
      }
    }
    a[static_cast<std::size_t>(i)] = best;
  }
  return a;
}

// Moves the point farthest from its centroid into each empty group.
void repair_empty(const Matrix& x, std::vector<Index>& a, Matrix& c, Index g) {
  for (Index m = 0; m < g; ++m) {
    std::vector<Index> count(static_cast<std::size_t>(g), 0);
    for (auto v : a) ++count[static_cast<std::size_t>(v)];
    if (count[static_cast<std::size_t>(m)] > 0) continue;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < x.cols(); ++i) {
      const auto owner = a[static_cast<std::size_t>(i)];
      if (count[static_cast<std::size_t>(owner)] < 2) continue;
      const double dist = (x.col(i) - c.row(owner).transpose()).squaredNorm();
      if (dist > far_d) {
        far_d = dist;
        far = i;
      }
    }
    a[static_cast<std::size_t>(far)] = m;
    c.row(m) = x.col(far).transpose();
  }
}

}  // namespace

std::vector<Index> Partition::members(Index m) const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (assignment[static_cast<std::size_t>(i)] == m) out.push_back(i);
  }
  return out;
}

Partition Partition::from_assignment(std::vector<Index> assignment, Index groups) {
  if (groups < 1) throw std::invalid_argument("partition needs at least one group");
  Partition p;
  p.groups = groups;
  p.sizes.assign(static_cast<std::size_t>(groups), 0);
  for (auto m : assignment) {
    if (m < 0 || m >= groups) {
      throw std::invalid_argument("group index " + std::to_string(m + 1) +
                                  " outside 1.." + std::to_string(groups));
    }
    ++p.sizes[static_cast<std::size_t>(m)];
  }
  for (Index m = 0; m < groups; ++m) {
    if (p.sizes[static_cast<std::size_t>(m)] == 0) {
      throw std::invalid_argument("group " + std::to_string(m + 1) + " is empty");
    }
  }
  p.assignment = std::move(assignment);
  return p;
}

double within_cluster_sse(const FeatureMatrix& features, const Partition& p) {
  return sse_of(features.values(), p.assignment, p.centroids);
}

KMeansResult kmeans(const FeatureMatrix& features, const KMeansOptions& opts) {
  const Matrix& x = features.values();
  const Index n = x.cols();
  const Index g = opts.groups;
  if (g < 1) throw std::invalid_argument("kmeans needs g >= 1");
  if (g > n) {
    throw std::invalid_argument("kmeans needs g <= n (g=" + std::to_string(g) +
                                ", n=" + std::to_string(n) + ")");
  }
  std::mt19937_64 rng(opts.seed);
  Matrix c = plus_plus_seeds(x, g, rng);
  std::vector<Index> a = assign_nearest(x, c);
  repair_empty(x, a, c, g);
  c = centroids_of(x, a, g);

  KMeansResult out;
  out.sse_trace.push_back(sse_of(x, a, c));
  for (int it = 0; it < opts.max_iter; ++it) {
    auto next = assign_nearest(x, c);
    repair_empty(x, next, c, g);
    ++out.iterations;
    if (next == a) break;
    a = std::move(next);
    c = centroids_of(x, a, g);
    out.sse_trace.push_back(sse_of(x, a, c));
  }
  out.partition = Partition::from_assignment(std::move(a), g);
  out.partition.centroids = std::move(c);
  return out;
}

void write_partition(std::ostream& out, const Partition& p) {
  for (Index i = 0; i < p.size(); ++i) {
    out << (i + 1) << ' ' << (p.assignment[static_cast<std::size_t>(i)] + 1) << '\n';
  }
}

Partition read_partition(std::istream& in) {
  std::map<long, long> entries;
  std::string raw;
  std::size_t line_no = 0;
  long max_group = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.empty() || raw.front() == '#') continue;
    std::istringstream ls(raw);
    long inst = 0, grp = 0;
    std::string extra;
    if (!(ls >> inst >> grp)) {
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected 'instance_idx group_idx'");
    }
    if ((ls >> extra) || inst < 1 || grp < 1) {
      throw FormatError("line " + std::to_string(line_no) + ": bad partition entry");
    }
    if (!entries.emplace(inst, grp).second) {
      throw FormatError("line " + std::to_string(line_no) + ": instance " +
                        std::to_string(inst) + " assigned twice");
    }
    max_group = std::max(max_group, grp);
  }
  const long n = static_cast<long>(entries.size());
  std::vector<Index> assign(static_cast<std::size_t>(n));
  for (const auto& [inst, grp] : entries) {
    if (inst > n) {
      throw FormatError("partition skips instances: index " + std::to_string(inst) +
                        " with only " + std::to_string(n) + " entries");
    }
    assign[static_cast<std::size_t>(inst - 1)] = grp - 1;
  }
  try {
    return Partition::from_assignment(std::move(assign), max_group);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

}  // namespace glocal
