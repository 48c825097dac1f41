#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "glocal/clustering.hpp"
#include "glocal/dataset.hpp"
#include "glocal/model.hpp"

namespace glocal {

struct Weights {
  double lambda = 1.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double lambda4 = 0.0;

  static Weights from(const Hyperparams& hp) {
    return {hp.lambda, hp.lambda2, hp.lambda3, hp.lambda4};
  }
  bool has_manifold() const { return lambda3 != 0.0 || lambda4 != 0.0; }
};

/// Everything the objective needs besides the parameters: labels Y, the
/// observation indicator J, instances X, the group structure and weights.
class ObjectiveContext {
 public:
  ObjectiveContext(const Dataset& data, const Partition& partition, Weights weights);
  /// Raw form; Y may hold arbitrary reals (only entries where J=1 matter).
  ObjectiveContext(Matrix labels, Matrix indicator, Matrix features,
                   const Partition& partition, Weights weights);

  const Matrix& labels() const { return labels_; }
  const Matrix& indicator() const { return indicator_; }
  const Matrix& features() const { return features_; }
  const Weights& weights() const { return weights_; }

  Index label_count() const { return labels_.rows(); }
  Index size() const { return features_.cols(); }
  Index dim() const { return features_.rows(); }
  Index groups() const { return static_cast<Index>(members_.size()); }

  const std::vector<Index>& members(Index m) const { return members_[static_cast<std::size_t>(m)]; }
  const Matrix& group_features(Index m) const { return group_features_[static_cast<std::size_t>(m)]; }
  /// n_m / n
  double group_share(Index m) const;

  ObjectiveContext with_weights(Weights w) const;

 private:
  Matrix labels_;
  Matrix indicator_;
  Matrix features_;
  std::vector<std::vector<Index>> members_;
  std::vector<Matrix> group_features_;
  Weights weights_;
};

struct Gradients {
  Matrix U;
  Matrix V;
  Matrix W;
  std::vector<Matrix> Z;
};

/// Full objective:
///   |J o (Y - UV)|^2 + lambda |V - W^T X|^2 + lambda2 (|U|^2 + |V|^2 + |W|^2)
///   + sum_m [ lambda3 n_m/n |Z_m^T F_0|^2 + lambda4 |Z_m^T F_m|^2 ]
/// with F_0 = U W^T X and F_m = U W^T X_m.
double objective(const GlocalModel& model, const ObjectiveContext& ctx);

/// Exact gradients of objective() for every block.
Gradients gradients(const GlocalModel& model, const ObjectiveContext& ctx);
Matrix gradient_U(const GlocalModel& model, const ObjectiveContext& ctx);
Matrix gradient_V(const GlocalModel& model, const ObjectiveContext& ctx);
Matrix gradient_W(const GlocalModel& model, const ObjectiveContext& ctx);
Matrix gradient_Z(const GlocalModel& model, const ObjectiveContext& ctx, Index m);

/// Manifold terms of group m alone, the part of the objective that depends on Z_m.
double factor_objective(const GlocalModel& model, const ObjectiveContext& ctx, Index m);

/// Column-wise minimiser of the V subproblem. Throws std::runtime_error when
/// lambda + lambda2 = 0 and some column's observed design is singular.
Matrix closed_form_V(const GlocalModel& model, const ObjectiveContext& ctx);

struct LineSearch {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 30;
};

/// `steps` projected-gradient steps on the Z_m subproblem with backtracking.
/// A step is taken only if the projected point satisfies sufficient decrease;
/// otherwise Z_m is left as it was. Reports the last accepted step (0 if none).
Matrix update_Z_step(const GlocalModel& model, const ObjectiveContext& ctx, Index m,
                     int steps = 1, const LineSearch& ls = {},
                     double* accepted_step = nullptr);

enum class Block { Z, V, U, W };

struct BlockEvent {
  int iteration;  // 1-based outer iteration (warm start iterations are negative)
  Block block;
  Index group;  // for Block::Z
  double objective;
  const GlocalModel& model;
};

using FitObserver = std::function<void(const BlockEvent&)>;

struct FitRecord {
  int iteration = 0;
  double objective = 0.0;
  std::vector<double> z_steps;
  double v_step = 0.0;  // 1 for an accepted closed-form solve
  double u_step = 0.0;
  double w_step = 0.0;
};

struct FitTrace {
  std::vector<FitRecord> records;  // records[0] is the state before the first outer iteration
  std::vector<double> warm_objectives;
  bool converged = false;

  std::vector<double> objectives() const;
};

/// `iter,objective` CSV.
void write_trace_csv(std::ostream& out, const FitTrace& trace,
                     const std::vector<std::string>& comments = {});

/// Alternating V (closed form), U, W updates on the objective with the
/// manifold weights zeroed, from a seeded initial U. The returned model also
/// carries freshly initialised Laplacian factors, one per group.
GlocalModel warm_start(const ObjectiveContext& ctx, const Hyperparams& hp,
                       FitTrace* trace = nullptr, const FitObserver& observer = {});

struct FitResult {
  GlocalModel model;
  FitTrace trace;
};

/// Warm start, then cycles Z_1..Z_g, V, U, W until the relative objective
/// change drops below hp.tol or hp.outer_iters is reached.
FitResult fit(const ObjectiveContext& ctx, const Hyperparams& hp, const FitObserver& observer = {});
FitResult fit(const Dataset& data, const Partition& partition, const Hyperparams& hp,
              const FitObserver& observer = {});

/// Latent width at or below which V is solved in closed form.
inline constexpr Index kClosedFormMaxLatent = 256;

}  // namespace glocal
