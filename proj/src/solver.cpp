#include "glocal/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "glocal/correlation.hpp"

namespace glocal {

namespace {

// Independent seed streams from one user seed (splitmix64 finaliser).
Seed derive_seed(Seed seed, Seed stream) {
  Seed z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr Seed kStreamU = 0;
constexpr Seed kStreamFactors = 1000;

void check_model(const GlocalModel& model, const ObjectiveContext& ctx) {
  const Index l = ctx.label_count(), n = ctx.size(), d = ctx.dim();
  const Index k = model.U.cols();
  require_shape(model.U, l, k, "U");
  require_shape(model.V, k, n, "V");
  require_shape(model.W, d, k, "W");
  if (model.groups() != ctx.groups()) {
    throw ShapeError("model has " + std::to_string(model.groups()) +
                     " factors but the partition has " + std::to_string(ctx.groups()) +
                     " groups");
  }
  for (const auto& z : model.factors) require_shape(z, l, k, "Z");
}

// Objective evaluated on explicit blocks so line searches can swap one in.
double evaluate(const Matrix& U, const Matrix& V, const Matrix& W,
                const std::vector<Matrix>& factors, const ObjectiveContext& ctx) {
  const Weights& w = ctx.weights();
  const Matrix P = W.transpose() * ctx.features();
  double f = (ctx.indicator().array() * (ctx.labels() - U * V).array()).matrix().squaredNorm();
  if (w.lambda != 0.0) f += w.lambda * (V - P).squaredNorm();
  if (w.lambda2 != 0.0) f += w.lambda2 * (U.squaredNorm() + V.squaredNorm() + W.squaredNorm());
  if (w.has_manifold()) {
    for (Index m = 0; m < ctx.groups(); ++m) {
      const Matrix A = factors[static_cast<std::size_t>(m)].transpose() * U;  // k x k
      if (w.lambda3 != 0.0) {
        f += w.lambda3 * ctx.group_share(m) * factored_trace(factors[static_cast<std::size_t>(m)], U * P);
      }
      if (w.lambda4 != 0.0) {
        f += w.lambda4 * (A * P(Eigen::all, ctx.members(m))).squaredNorm();
      }
    }
  }
  return f;
}

// (lambda3 n_m/n) P P^T + lambda4 P_m P_m^T, the k x k weighting of group m.
Matrix group_gram(const Matrix& P, const ObjectiveContext& ctx, Index m) {
  const Weights& w = ctx.weights();
  const Index k = P.rows();
  Matrix M = Matrix::Zero(k, k);
  if (w.lambda3 != 0.0) M.noalias() += (w.lambda3 * ctx.group_share(m)) * (P * P.transpose());
  if (w.lambda4 != 0.0) {
    const Matrix Pm = P(Eigen::all, ctx.members(m));
    M.noalias() += w.lambda4 * (Pm * Pm.transpose());
  }
  return M;
}

double relative_change(double before, double after) {
  const double denom = std::max(std::abs(before), std::numeric_limits<double>::min());
  return std::abs(before - after) / denom;
}

// Backtracking on an unconstrained block: x <- x - t g with Armijo decrease.
template <typename Eval>
double descend(Matrix& x, const Matrix& grad, double& fx, const LineSearch& ls, Eval&& eval) {
  const double g2 = grad.squaredNorm();
  if (g2 == 0.0) return 0.0;
  double t = ls.initial_step;
  for (int b = 0; b <= ls.max_backtracks; ++b, t *= ls.shrink) {
    Matrix cand = x - t * grad;
    const double fc = eval(cand);
    if (fc <= fx - ls.sufficient_decrease * t * g2) {
      x = std::move(cand);
      fx = fc;
      return t;
    }
  }
  return 0.0;
}

}  // namespace

ObjectiveContext::ObjectiveContext(const Dataset& data, const Partition& partition,
                                   Weights weights)
    : ObjectiveContext(data.labels.values(), data.labels.indicator(),
                       data.features.values(), partition, weights) {}

ObjectiveContext::ObjectiveContext(Matrix labels, Matrix indicator, Matrix features,
                                   const Partition& partition, Weights weights)
    : labels_(std::move(labels)),
      indicator_(std::move(indicator)),
      features_(std::move(features)),
      weights_(weights) {
  const Index n = features_.cols();
  require_shape(labels_, labels_.rows(), n, "labels");
  require_shape(indicator_, labels_.rows(), n, "indicator");
  if (partition.size() != n) {
    throw ShapeError("partition covers " + std::to_string(partition.size()) +
                     " instances, data has " + std::to_string(n));
  }
  if (!(weights.lambda >= 0 && weights.lambda2 >= 0 && weights.lambda3 >= 0 &&
        weights.lambda4 >= 0)) {
    throw std::invalid_argument("objective weights must be non-negative");
  }
  for (Index m = 0; m < partition.groups; ++m) {
    members_.push_back(partition.members(m));
    if (members_.back().empty()) {
      throw ShapeError("partition group " + std::to_string(m + 1) + " is empty");
    }
    group_features_.push_back(features_(Eigen::all, members_.back()));
  }
}

double ObjectiveContext::group_share(Index m) const {
  return static_cast<double>(members(m).size()) / static_cast<double>(size());
}

ObjectiveContext ObjectiveContext::with_weights(Weights w) const {
  ObjectiveContext out = *this;
  out.weights_ = w;
  return out;
}

double objective(const GlocalModel& model, const ObjectiveContext& ctx) {
  check_model(model, ctx);
  return evaluate(model.U, model.V, model.W, model.factors, ctx);
}

Matrix gradient_V(const GlocalModel& model, const ObjectiveContext& ctx) {
  check_model(model, ctx);
  const Weights& w = ctx.weights();
  const Matrix R = (ctx.indicator().array() * (model.U * model.V - ctx.labels()).array()).matrix();
  Matrix G = 2.0 * model.U.transpose() * R;
  if (w.lambda != 0.0) G += 2.0 * w.lambda * (model.V - model.W.transpose() * ctx.features());
  if (w.lambda2 != 0.0) G += 2.0 * w.lambda2 * model.V;
  return G;
}

Matrix gradient_U(const GlocalModel& model, const ObjectiveContext& ctx) {
  check_model(model, ctx);
  const Weights& w = ctx.weights();
  const Matrix R = (ctx.indicator().array() * (model.U * model.V - ctx.labels()).array()).matrix();
  Matrix G = 2.0 * R * model.V.transpose();
  if (w.lambda2 != 0.0) G += 2.0 * w.lambda2 * model.U;
  if (w.has_manifold()) {
    const Matrix P = model.W.transpose() * ctx.features();
    for (Index m = 0; m < ctx.groups(); ++m) {
      const Matrix& Z = model.factors[static_cast<std::size_t>(m)];
      G.noalias() += 2.0 * Z * ((Z.transpose() * model.U) * group_gram(P, ctx, m));
    }
  }
  return G;
}

Matrix gradient_W(const GlocalModel& model, const ObjectiveContext& ctx) {
  check_model(model, ctx);
  const Weights& w = ctx.weights();
  const Matrix& X = ctx.features();
  const Matrix Pt = X.transpose() * model.W;  // n x k
  Matrix G = Matrix::Zero(model.W.rows(), model.W.cols());
  if (w.lambda != 0.0) G.noalias() += 2.0 * w.lambda * X * (Pt - model.V.transpose());
  if (w.lambda2 != 0.0) G += 2.0 * w.lambda2 * model.W;
  if (w.has_manifold()) {
    const Index k = model.U.cols();
    Matrix global_b = Matrix::Zero(k, k);
    for (Index m = 0; m < ctx.groups(); ++m) {
      const Matrix A = model.factors[static_cast<std::size_t>(m)].transpose() * model.U;
      const Matrix B = A.transpose() * A;  // U^T Z_m Z_m^T U
      if (w.lambda3 != 0.0) global_b += (w.lambda3 * ctx.group_share(m)) * B;
      if (w.lambda4 != 0.0) {
        const Matrix Ptm = Pt(ctx.members(m), Eigen::all);
        G.noalias() += 2.0 * w.lambda4 * ctx.group_features(m) * (Ptm * B);
      }
    }
    if (w.lambda3 != 0.0) G.noalias() += 2.0 * X * (Pt * global_b);
  }
  return G;
}

Matrix gradient_Z(const GlocalModel& model, const ObjectiveContext& ctx, Index m) {
  check_model(model, ctx);
  const Matrix& Z = model.factors[static_cast<std::size_t>(m)];
  if (!ctx.weights().has_manifold()) return Matrix::Zero(Z.rows(), Z.cols());
  const Matrix P = model.W.transpose() * ctx.features();
  const Matrix M = group_gram(P, ctx, m);
  return 2.0 * model.U * (M * (model.U.transpose() * Z));
}

Gradients gradients(const GlocalModel& model, const ObjectiveContext& ctx) {
  Gradients g;
  g.U = gradient_U(model, ctx);
  g.V = gradient_V(model, ctx);
  g.W = gradient_W(model, ctx);
  for (Index m = 0; m < ctx.groups(); ++m) g.Z.push_back(gradient_Z(model, ctx, m));
  return g;
}

double factor_objective(const GlocalModel& model, const ObjectiveContext& ctx, Index m) {
  check_model(model, ctx);
  if (!ctx.weights().has_manifold()) return 0.0;
  const Matrix P = model.W.transpose() * ctx.features();
  const Matrix B = model.U.transpose() * model.factors[static_cast<std::size_t>(m)];
  return (B.transpose() * group_gram(P, ctx, m) * B).trace();
}

Matrix closed_form_V(const GlocalModel& model, const ObjectiveContext& ctx) {
  check_model(model, ctx);
  const Weights& w = ctx.weights();
  const Matrix& U = model.U;
  const Index k = U.cols();
  const double ridge = w.lambda + w.lambda2;
  const Matrix P = model.W.transpose() * ctx.features();
  Matrix V(k, ctx.size());
  for (Index i = 0; i < ctx.size(); ++i) {
    const auto j = ctx.indicator().col(i);
    Matrix A = U.transpose() * j.asDiagonal() * U;
    A.diagonal().array() += ridge;
    const Vector rhs = w.lambda * P.col(i) +
                       U.transpose() * (j.array() * ctx.labels().col(i).array()).matrix();
    if (ridge > 0.0) {
      Eigen::LLT<Matrix> llt(A);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("closed_form_V: system for column " + std::to_string(i + 1) +
                                 " is not positive definite");
      }
      V.col(i) = llt.solve(rhs);
    } else {
      Eigen::FullPivLU<Matrix> lu(A);
      if (!lu.isInvertible()) {
        throw std::runtime_error("closed_form_V: singular system for column " +
                                 std::to_string(i + 1) + " (lambda + lambda2 = 0)");
      }
      V.col(i) = lu.solve(rhs);
    }
  }
  return V;
}

Matrix update_Z_step(const GlocalModel& model, const ObjectiveContext& ctx, Index m, int steps,
                     const LineSearch& ls, double* accepted_step) {
  check_model(model, ctx);
  if (m < 0 || m >= ctx.groups()) throw ShapeError("update_Z_step: group out of range");
  Matrix Z = model.factors[static_cast<std::size_t>(m)];
  if (accepted_step) *accepted_step = 0.0;
  if (!ctx.weights().has_manifold()) return Z;

  const Matrix P = model.W.transpose() * ctx.features();
  const Matrix M = group_gram(P, ctx, m);
  // Restricted objective tr(Z^T U M U^T Z) and its gradient.
  auto value = [&](const Matrix& z) {
    const Matrix B = model.U.transpose() * z;
    return (B.transpose() * M * B).trace();
  };
  double fz = value(Z);
  for (int s = 0; s < steps; ++s) {
    const Matrix G = 2.0 * model.U * (M * (model.U.transpose() * Z));
    if (G.squaredNorm() == 0.0) break;
    double t = ls.initial_step;
    bool moved = false;
    for (int b = 0; b <= ls.max_backtracks; ++b, t *= ls.shrink) {
      Matrix cand = Z - t * G;
      project_unit_rows_inplace(cand, static_cast<Seed>(m * 131 + s * 7 + b));
      const double fc = value(cand);
      if (fc <= fz - ls.sufficient_decrease * (cand - Z).squaredNorm() / t) {
        Z = std::move(cand);
        fz = fc;
        moved = true;
        if (accepted_step) *accepted_step = t;
        break;
      }
    }
    if (!moved) break;
  }
  return Z;
}

std::vector<double> FitTrace::objectives() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.objective);
  return out;
}

void write_trace_csv(std::ostream& out, const FitTrace& trace,
                     const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "iter,objective\n";
  const auto old = out.precision(17);
  for (const auto& r : trace.records) out << r.iteration << ',' << r.objective << '\n';
  out.precision(old);
}

namespace {

struct Cycle {
  double v_step = 0.0;
  double u_step = 0.0;
  double w_step = 0.0;
};

// One V, U, W sweep. `f` is the current objective and is kept up to date.
Cycle update_vuw(GlocalModel& model, const ObjectiveContext& ctx, const Hyperparams& hp,
                 double& f, int iteration, const FitObserver& observer) {
  const LineSearch ls;
  Cycle c;
  auto notify = [&](Block b) {
    if (observer) observer(BlockEvent{iteration, b, 0, f, model});
  };

  if (model.latent() <= kClosedFormMaxLatent) {
    Matrix V = closed_form_V(model, ctx);
    const double fv = evaluate(model.U, V, model.W, model.factors, ctx);
    if (fv <= f) {
      model.V = std::move(V);
      f = fv;
      c.v_step = 1.0;
    }
  } else {
    for (int s = 0; s < hp.inner_steps; ++s) {
      const Matrix G = gradient_V(model, ctx);
      c.v_step = descend(model.V, G, f, ls, [&](const Matrix& v) {
        return evaluate(model.U, v, model.W, model.factors, ctx);
      });
      if (c.v_step == 0.0) break;
    }
  }
  notify(Block::V);

  for (int s = 0; s < hp.inner_steps; ++s) {
    const Matrix G = gradient_U(model, ctx);
    c.u_step = descend(model.U, G, f, ls, [&](const Matrix& u) {
      return evaluate(u, model.V, model.W, model.factors, ctx);
    });
    if (c.u_step == 0.0) break;
  }
  notify(Block::U);

  for (int s = 0; s < hp.inner_steps; ++s) {
    const Matrix G = gradient_W(model, ctx);
    c.w_step = descend(model.W, G, f, ls, [&](const Matrix& w) {
      return evaluate(model.U, model.V, w, model.factors, ctx);
    });
    if (c.w_step == 0.0) break;
  }
  notify(Block::W);
  return c;
}

}  // namespace

GlocalModel warm_start(const ObjectiveContext& full_ctx, const Hyperparams& hp,
                       FitTrace* trace, const FitObserver& observer) {
  hp.validate();
  Weights w = full_ctx.weights();
  w.lambda3 = 0.0;
  w.lambda4 = 0.0;
  const ObjectiveContext ctx = full_ctx.with_weights(w);

  const Index l = ctx.label_count(), k = hp.k;
  GlocalModel model;
  {
    std::mt19937_64 rng(derive_seed(hp.seed, kStreamU));
    std::normal_distribution<Scalar> normal(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
    model.U.resize(l, k);
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < l; ++i) model.U(i, j) = normal(rng);
    }
  }
  model.V = Matrix::Zero(k, ctx.size());
  model.W = Matrix::Zero(ctx.dim(), k);
  // Factors are attached up front (they do not enter this objective).
  for (Index m = 0; m < ctx.groups(); ++m) {
    model.factors.push_back(init_factor(l, k, derive_seed(hp.seed, kStreamFactors + m)));
  }

  double f = evaluate(model.U, model.V, model.W, model.factors, ctx);
  if (trace) trace->warm_objectives.push_back(f);
  for (int it = 1; it <= hp.warm_iters; ++it) {
    const double before = f;
    update_vuw(model, ctx, hp, f, -it, observer);
    if (trace) trace->warm_objectives.push_back(f);
    if (relative_change(before, f) < hp.tol) break;
  }
  return model;
}

FitResult fit(const ObjectiveContext& ctx, const Hyperparams& hp, const FitObserver& observer) {
  hp.validate();
  FitResult out;
  GlocalModel& model = out.model;
  model = warm_start(ctx, hp, &out.trace, observer);
  const LineSearch ls;

  double f = evaluate(model.U, model.V, model.W, model.factors, ctx);
  out.trace.records.push_back(FitRecord{0, f, {}, 0.0, 0.0, 0.0});
  for (int it = 1; it <= hp.outer_iters; ++it) {
    const double before = f;
    FitRecord rec;
    rec.iteration = it;
    for (Index m = 0; m < ctx.groups(); ++m) {
      double step = 0.0;
      Matrix z = update_Z_step(model, ctx, m, hp.inner_steps, ls, &step);
      rec.z_steps.push_back(step);
      if (step > 0.0) {
        model.factors[static_cast<std::size_t>(m)] = std::move(z);
        f = evaluate(model.U, model.V, model.W, model.factors, ctx);
      }
      if (observer) observer(BlockEvent{it, Block::Z, m, f, model});
    }
    const Cycle c = update_vuw(model, ctx, hp, f, it, observer);
    rec.v_step = c.v_step;
    rec.u_step = c.u_step;
    rec.w_step = c.w_step;
    rec.objective = f;
    out.trace.records.push_back(std::move(rec));
    if (relative_change(before, f) < hp.tol) {
      out.trace.converged = true;
      break;
    }
  }
  return out;
}

FitResult fit(const Dataset& data, const Partition& partition, const Hyperparams& hp,
              const FitObserver& observer) {
  return fit(ObjectiveContext(data, partition, Weights::from(hp)), hp, observer);
}

}  // namespace glocal
