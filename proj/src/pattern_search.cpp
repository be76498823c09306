#include "bnopt/pattern_search.hpp"

#include <algorithm>

namespace bnopt {

PatternSearchResult pattern_search_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                            Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                                            const Eigen::VectorXd& upper,
                                            const PatternSearchOptions& opts) {
  const Eigen::Index dims = x0.size();
  Eigen::VectorXd width = upper - lower;
  for (Eigen::Index i = 0; i < dims; ++i)
    x0[i] = std::clamp(x0[i], lower[i], upper[i]);

  PatternSearchResult best{x0, f(x0), 1};
  double step = opts.initial_step;

  while (step >= opts.min_step && best.evals < opts.max_evals) {
    bool improved = false;
    for (Eigen::Index i = 0; i < dims && best.evals < opts.max_evals; ++i) {
      if (width[i] <= 0.0) continue;
      for (double sign : {+1.0, -1.0}) {
        Eigen::VectorXd cand = best.x;
        cand[i] = std::clamp(cand[i] + sign * step * width[i], lower[i], upper[i]);
        if (cand[i] == best.x[i]) continue;
        double v = f(cand);
        ++best.evals;
        if (v < best.value) {
          best.value = v;
          best.x = std::move(cand);
          improved = true;
          break;  // keep sweeping remaining coordinates at this step
        }
        if (best.evals >= opts.max_evals) break;
      }
    }
    if (!improved) step *= opts.shrink;
  }
  return best;
}

}  // namespace bnopt
