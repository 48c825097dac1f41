#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "glocal/clustering.hpp"
#include "glocal/correlation.hpp"
#include "glocal/dataset.hpp"
#include "glocal/metrics.hpp"
#include "glocal/solver.hpp"
#include "glocal/synth.hpp"

namespace glocal::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_output_path(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
}

void require_input_path(const std::string& path) {
  if (!path.empty() && !fs::is_regular_file(path)) {
    throw UsageError("input file does not exist: " + path);
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  return in;
}

std::string seed_comment(const std::string& cmd, Seed seed) {
  return "glocal " + cmd + " seed=" + std::to_string(seed);
}

void write_gml_file(const std::string& path, const Dataset& data,
                    const std::vector<std::string>& comments) {
  auto out = open_out(path);
  for (const auto& c : comments) out << "# " << c << '\n';
  write_gml(out, data);
}

void add_hyperparams(CLI::App* app, Hyperparams& hp) {
  app->add_option("--lambda", hp.lambda, "reconstruction/mapping trade-off")->capture_default_str();
  app->add_option("--lambda2", hp.lambda2, "Frobenius regulariser")->capture_default_str();
  app->add_option("--lambda3", hp.lambda3, "global manifold weight")->capture_default_str();
  app->add_option("--lambda4", hp.lambda4, "local manifold weight")->capture_default_str();
  app->add_option("--latent-k", hp.k, "latent dimension")->capture_default_str();
  app->add_option("--groups", hp.g, "number of local groups")->capture_default_str();
  app->add_option("--outer-iters", hp.outer_iters)->capture_default_str();
  app->add_option("--inner-steps", hp.inner_steps)->capture_default_str();
  app->add_option("--warm-iters", hp.warm_iters)->capture_default_str();
  app->add_option("--tol", hp.tol, "relative objective tolerance")->capture_default_str();
  app->add_option("--seed", hp.seed)->capture_default_str();
}

Dataset load_training(const std::string& path, bool bias) {
  Dataset data = read_gml_file(path);
  if (bias) data = Dataset(data.features.with_constant_feature(), data.labels);
  return data;
}

Partition partition_for(const Dataset& data, const Hyperparams& hp,
                        const std::string& partition_path) {
  if (partition_path.empty()) {
    return kmeans(data.features, KMeansOptions{hp.g, hp.seed, 100}).partition;
  }
  auto in = open_in(partition_path);
  Partition p = read_partition(in);
  if (p.size() != data.size()) {
    throw UsageError("partition file covers " + std::to_string(p.size()) +
                     " instances but training data has " + std::to_string(data.size()));
  }
  return p;
}

std::vector<std::string> hp_comments(const Hyperparams& hp) {
  std::ostringstream s;
  s << "lambda=" << hp.lambda << " lambda2=" << hp.lambda2 << " lambda3=" << hp.lambda3
    << " lambda4=" << hp.lambda4 << " k=" << hp.k << " g=" << hp.g
    << " outer_iters=" << hp.outer_iters << " inner_steps=" << hp.inner_steps
    << " warm_iters=" << hp.warm_iters << " tol=" << hp.tol;
  return {seed_comment("train", hp.seed), s.str()};
}

// Mean ranking loss over 5 folds of the observed training labels.
double cross_validate(const Dataset& data, const Hyperparams& hp, int folds) {
  const Index n = data.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(hp.seed);
  std::shuffle(order.begin(), order.end(), rng);
  double sum = 0.0;
  int used = 0;
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, valid;
    for (Index i = 0; i < n; ++i) {
      (i % folds == f ? valid : train).push_back(order[static_cast<std::size_t>(i)]);
    }
    std::sort(train.begin(), train.end());
    std::sort(valid.begin(), valid.end());
    if (train.empty() || valid.empty() || static_cast<Index>(train.size()) < hp.g) continue;
    const Dataset tr = data.columns(train);
    const Dataset va = data.columns(valid);
    const Partition p = kmeans(tr.features, KMeansOptions{hp.g, hp.seed, 100}).partition;
    const FitResult res = fit(tr, p, hp);
    try {
      sum += ranking_loss(score(res.model, va.features), va.labels.values());
      ++used;
    } catch (const UndefinedMetric&) {
    }
  }
  if (used == 0) return std::numeric_limits<double>::infinity();
  return sum / used;
}

int cmd_synth(const SynthSpec& spec, const std::string& full, const std::string& masked,
              const std::string& hidden) {
  const SynthData data = synthesize(spec);
  std::ostringstream c;
  c << "l=" << spec.labels << " n=" << spec.instances << " d=" << spec.dim
    << " k_true=" << spec.latent << " noise=" << spec.noise << " rho=" << spec.rho;
  const std::vector<std::string> comments{seed_comment("synth", spec.seed), c.str()};
  write_gml_file(full, data.full, comments);
  if (!masked.empty()) write_gml_file(masked, data.masked, comments);
  if (!hidden.empty()) {
    auto out = open_out(hidden);
    out << "# " << comments[0] << '\n';
    write_hidden(out, data.hidden);
  }
  return 0;
}

}  // namespace

std::vector<Hyperparams> expand_grid(const std::string& spec, const Hyperparams& base) {
  std::vector<Hyperparams> grid{base};
  std::stringstream groups(spec);
  std::string item;
  while (std::getline(groups, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("grid entry '" + item + "' lacks '='");
    const std::string name = item.substr(0, eq);
    std::vector<double> values;
    std::stringstream vs(item.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw UsageError("grid value '" + v + "' for " + name + " is not a number");
      }
    }
    if (values.empty()) throw UsageError("grid entry '" + name + "' has no values");
    std::vector<Hyperparams> next;
    for (const auto& hp : grid) {
      for (double x : values) {
        Hyperparams h = hp;
        if (name == "lambda2") h.lambda2 = x;
        else if (name == "lambda3") h.lambda3 = x;
        else if (name == "lambda4") h.lambda4 = x;
        else if (name == "k") h.k = static_cast<Index>(x);
        else if (name == "g") h.g = static_cast<Index>(x);
        else throw UsageError("unknown grid parameter '" + name + "'");
        h.validate();
        next.push_back(h);
      }
    }
    grid = std::move(next);
  }
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GLOCAL multi-label learning with global and local label correlations"};
  app.require_subcommand(1);

  // synth
  SynthSpec synth_spec;
  std::string synth_full, synth_masked, synth_hidden;
  auto* synth = app.add_subcommand("synth", "generate a planted synthetic dataset");
  synth->add_option("--labels", synth_spec.labels)->capture_default_str();
  synth->add_option("--instances", synth_spec.instances)->capture_default_str();
  synth->add_option("--dim", synth_spec.dim)->capture_default_str();
  synth->add_option("--latent-true", synth_spec.latent)->capture_default_str();
  synth->add_option("--noise", synth_spec.noise)->capture_default_str();
  synth->add_option("--rho", synth_spec.rho, "percent of label entries kept")->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--out-full", synth_full)->required();
  synth->add_option("--out-masked", synth_masked);
  synth->add_option("--out-hidden", synth_hidden);

  // mask
  std::string mask_in, mask_out, mask_hidden;
  MaskSpec mask_spec;
  auto* mask = app.add_subcommand("mask", "hide a random share of label entries");
  mask->add_option("--input", mask_in)->required();
  mask->add_option("--rho", mask_spec.rho)->required();
  mask->add_option("--seed", mask_spec.seed)->capture_default_str();
  mask->add_option("--output", mask_out)->required();
  mask->add_option("--hidden", mask_hidden);

  // split
  std::string split_in, split_train, split_test;
  double split_fraction = 0.6;
  Seed split_seed = 0;
  auto* splitc = app.add_subcommand("split", "random train/test split of instances");
  splitc->add_option("--input", split_in)->required();
  splitc->add_option("--train-fraction", split_fraction)->capture_default_str();
  splitc->add_option("--seed", split_seed)->capture_default_str();
  splitc->add_option("--train", split_train)->required();
  splitc->add_option("--test", split_test)->required();

  // cluster
  std::string cluster_in, cluster_out;
  KMeansOptions km;
  auto* cluster = app.add_subcommand("cluster", "k-means partition of the instances");
  cluster->add_option("--input", cluster_in)->required();
  cluster->add_option("--groups", km.groups)->required();
  cluster->add_option("--seed", km.seed)->capture_default_str();
  cluster->add_option("--max-iter", km.max_iter)->capture_default_str();
  cluster->add_option("--output", cluster_out)->required();

  // train
  Hyperparams hp;
  std::string train_in, train_model, train_partition, train_trace, train_grid, train_grid_out;
  bool train_bias = false;
  auto* train = app.add_subcommand("train", "fit a model");
  train->add_option("--input", train_in)->required();
  train->add_option("--model", train_model)->required();
  train->add_option("--partition", train_partition, "partition file instead of k-means");
  train->add_option("--trace", train_trace, "write iter,objective CSV");
  train->add_option("--grid", train_grid, "e.g. 'lambda3=0,0.1;lambda4=0,0.1' (5-fold CV)");
  train->add_option("--grid-out", train_grid_out, "CSV of grid results");
  train->add_flag("--bias", train_bias, "append a constant feature");
  add_hyperparams(train, hp);

  // predict
  std::string pred_model, pred_in, pred_scores, pred_labels;
  bool pred_bias = false;
  auto* pred = app.add_subcommand("predict", "score instances with a trained model");
  pred->add_option("--model", pred_model)->required();
  pred->add_option("--input", pred_in)->required();
  pred->add_option("--scores", pred_scores)->required();
  pred->add_option("--labels", pred_labels);
  pred->add_flag("--bias", pred_bias, "append a constant feature (must match training)");

  // eval
  std::string eval_scores, eval_truth, eval_hidden, eval_out;
  auto* eval = app.add_subcommand("eval", "ranking metrics of a score file");
  eval->add_option("--scores", eval_scores)->required();
  auto* truth_opt = eval->add_option("--truth", eval_truth, "GML file with ground-truth labels");
  auto* hidden_opt = eval->add_option("--hidden", eval_hidden, "hidden-entry sidecar as truth");
  truth_opt->excludes(hidden_opt);
  eval->add_option("--output", eval_out, "report CSV (stdout if omitted)");

  // correlation
  std::string corr_in, corr_out;
  bool corr_laplacian = false;
  auto* corr = app.add_subcommand("correlation", "cosine label correlation as CSV");
  corr->add_option("--input", corr_in)->required();
  corr->add_option("--output", corr_out)->required();
  corr->add_flag("--laplacian", corr_laplacian, "emit the Laplacian instead");

  // sweep
  Hyperparams sweep_hp;
  std::string sweep_in, sweep_param = "lambda3", sweep_values, sweep_out, sweep_partition;
  auto* sweep = app.add_subcommand("sweep", "final objective across one hyperparameter");
  sweep->add_option("--input", sweep_in)->required();
  sweep->add_option("--param", sweep_param)->capture_default_str();
  sweep->add_option("--values", sweep_values, "comma-separated")->required();
  sweep->add_option("--output", sweep_out)->required();
  sweep->add_option("--partition", sweep_partition);
  add_hyperparams(sweep, sweep_hp);

  std::vector<std::string> argv_store{"glocal"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (synth->parsed()) {
      for (const auto* p : {&synth_full, &synth_masked, &synth_hidden}) require_output_path(*p);
      return cmd_synth(synth_spec, synth_full, synth_masked, synth_hidden);
    }
    if (mask->parsed()) {
      require_input_path(mask_in);
      require_output_path(mask_out);
      require_output_path(mask_hidden);
      const auto res = apply_mask(read_gml_file(mask_in), mask_spec);
      write_gml_file(mask_out, res.masked, {seed_comment("mask", mask_spec.seed)});
      if (!mask_hidden.empty()) {
        auto h = open_out(mask_hidden);
        h << "# " << seed_comment("mask", mask_spec.seed) << '\n';
        write_hidden(h, res.hidden);
      }
      return 0;
    }
    if (splitc->parsed()) {
      require_input_path(split_in);
      require_output_path(split_train);
      require_output_path(split_test);
      const auto res = split(read_gml_file(split_in), split_fraction, split_seed);
      write_gml_file(split_train, res.train, {seed_comment("split", split_seed)});
      write_gml_file(split_test, res.test, {seed_comment("split", split_seed)});
      return 0;
    }
    if (cluster->parsed()) {
      require_input_path(cluster_in);
      require_output_path(cluster_out);
      const auto res = kmeans(read_gml_file(cluster_in).features, km);
      auto o = open_out(cluster_out);
      o << "# " << seed_comment("cluster", km.seed) << '\n';
      write_partition(o, res.partition);
      return 0;
    }
    if (train->parsed()) {
      require_input_path(train_in);
      require_input_path(train_partition);
      require_output_path(train_model);
      require_output_path(train_trace);
      require_output_path(train_grid_out);
      hp.validate();
      const Dataset data = load_training(train_in, train_bias);
      if (!train_grid.empty()) {
        if (!train_partition.empty()) {
          throw UsageError("--grid selects g itself and cannot be combined with --partition");
        }
        const auto grid = expand_grid(train_grid, hp);
        std::vector<GridPoint> results;
        for (const auto& h : grid) results.push_back({h, cross_validate(data, h, 5)});
        const auto best = std::min_element(results.begin(), results.end(),
                                           [](const GridPoint& a, const GridPoint& b) {
                                             return a.cv_rkl < b.cv_rkl;
                                           });
        if (!train_grid_out.empty()) {
          auto o = open_out(train_grid_out);
          o << "lambda2,lambda3,lambda4,k,g,cv_rkl\n";
          for (const auto& r : results) {
            o << r.hp.lambda2 << ',' << r.hp.lambda3 << ',' << r.hp.lambda4 << ',' << r.hp.k
              << ',' << r.hp.g << ',' << r.cv_rkl << '\n';
          }
        }
        hp = best->hp;
      }
      const Partition p = partition_for(data, hp, train_partition);
      const FitResult res = fit(data, p, hp);
      {
        auto o = open_out(train_model);
        save_model(o, res.model, hp_comments(hp));
      }
      if (!train_trace.empty()) {
        auto o = open_out(train_trace);
        write_trace_csv(o, res.trace, {seed_comment("train", hp.seed)});
      }
      return 0;
    }
    if (pred->parsed()) {
      require_input_path(pred_model);
      require_input_path(pred_in);
      require_output_path(pred_scores);
      require_output_path(pred_labels);
      auto mi = open_in(pred_model);
      const GlocalModel model = load_model(mi);
      const Dataset data = load_training(pred_in, pred_bias);
      const Matrix s = score(model, data.features);
      {
        auto o = open_out(pred_scores);
        write_dense(o, s.transpose(), {"glocal predict scores (instances x labels)"});
      }
      if (!pred_labels.empty()) {
        auto o = open_out(pred_labels);
        write_dense(o, sign_labels(s).transpose(), {"glocal predict labels (instances x labels)"});
      }
      return 0;
    }
    if (eval->parsed()) {
      require_input_path(eval_scores);
      require_input_path(eval_truth);
      require_input_path(eval_hidden);
      require_output_path(eval_out);
      if (eval_truth.empty() && eval_hidden.empty()) {
        throw UsageError("eval needs --truth or --hidden");
      }
      auto si = open_in(eval_scores);
      const Matrix scores = read_dense(si).transpose();  // l x n
      Matrix truth;
      if (!eval_truth.empty()) {
        truth = read_gml_file(eval_truth).labels.values();
      } else {
        auto hi = open_in(eval_hidden);
        truth = hidden_truth(read_hidden(hi), scores.rows(), scores.cols());
      }
      if (truth.rows() != scores.rows() || truth.cols() != scores.cols()) {
        throw UsageError("scores are " + shape_string(scores.cols(), scores.rows()) +
                         " (instances x labels) but truth is " +
                         shape_string(truth.cols(), truth.rows()));
      }
      const auto report = evaluate(scores, truth);
      if (eval_out.empty()) {
        write_report_csv(out, report);
      } else {
        auto o = open_out(eval_out);
        write_report_csv(o, report);
      }
      return 0;
    }
    if (corr->parsed()) {
      require_input_path(corr_in);
      require_output_path(corr_out);
      const Matrix s = cosine_correlation(read_gml_file(corr_in).labels.values());
      auto o = open_out(corr_out);
      write_matrix_csv(o, corr_laplacian ? laplacian_of(s) : s);
      return 0;
    }
    if (sweep->parsed()) {
      require_input_path(sweep_in);
      require_input_path(sweep_partition);
      require_output_path(sweep_out);
      const auto grid = expand_grid(sweep_param + "=" + sweep_values, sweep_hp);
      const Dataset data = read_gml_file(sweep_in);
      auto o = open_out(sweep_out);
      o << "# " << seed_comment("sweep", sweep_hp.seed) << '\n';
      o << sweep_param << ",objective,iterations\n";
      o.precision(17);
      for (const auto& h : grid) {
        const Partition p = partition_for(data, h, sweep_partition);
        const FitResult res = fit(data, p, h);
        const double value = sweep_param == "lambda2"   ? h.lambda2
                             : sweep_param == "lambda3" ? h.lambda3
                             : sweep_param == "lambda4" ? h.lambda4
                             : sweep_param == "k"       ? static_cast<double>(h.k)
                                                        : static_cast<double>(h.g);
        o << value << ',' << res.trace.records.back().objective << ','
          << res.trace.records.size() - 1 << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace glocal::cli
