#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "glocal/model.hpp"

namespace glocal::cli {

/// Runs one subcommand. Returns the process exit status; diagnostics go to
/// `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One point of a hyperparameter grid with its cross-validated ranking loss.
struct GridPoint {
  Hyperparams hp;
  double cv_rkl = 0.0;
};

/// Parses `name=v1,v2;name=v3` over lambda2, lambda3, lambda4, k and g into the
/// cartesian product applied on top of `base`.
std::vector<Hyperparams> expand_grid(const std::string& spec, const Hyperparams& base);

}  // namespace glocal::cli
