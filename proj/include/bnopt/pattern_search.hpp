#pragma once

#include <functional>

#include <Eigen/Core>

namespace bnopt {

struct PatternSearchOptions {
  double initial_step = 0.25;  // fraction of each box width
  double shrink = 0.5;
  double min_step = 1e-3;      // stop once the step fraction falls below this
  int max_evals = 400;
};

struct PatternSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
};

/// Box-constrained compass search: sweep coordinates in order, accept the
/// first improving +/- step, halve the step after a sweep with no progress.
/// Fully deterministic; f is evaluated at most max_evals times beyond x0.
PatternSearchResult pattern_search_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                            Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                                            const Eigen::VectorXd& upper,
                                            const PatternSearchOptions& opts = {});

}  // namespace bnopt
