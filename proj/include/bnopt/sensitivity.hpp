#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "bnopt/gp.hpp"

namespace bnopt {

using GridValue = std::variant<double, std::string>;

/// A marginal effect estimate on the fitted posterior-mean surface: for each
/// grid value of one variable (optionally with a second variable held at a
/// conditioning level), the Monte Carlo average over all remaining variables
/// drawn uniformly (branch levels uniform, nested values conditional on the
/// drawn parent level).
struct EffectCurve {
  std::string variable;
  std::string conditioning_variable;  // empty for main effects
  std::string conditioning_level;     // empty for main effects
  std::vector<GridValue> grid;
  std::vector<double> values;
  std::vector<double> std_err;
  int n_mc = 0;
};

/// Resolve a variable reference: a plain name, or "name@parent=level" to pin
/// down a nested variable that repeats across levels of its parent. Throws
/// std::invalid_argument for unknown or ambiguous references.
struct VariableRef {
  enum class Kind { shared_quant, branch, nested };
  Kind kind = Kind::shared_quant;
  int index = 0;  // into space.quant() / branch() / nested()
  std::string display;
};
VariableRef resolve_variable(const SearchSpace& space, const std::string& ref);

/// Evenly spaced model-scale grid over a quantitative variable's range, or
/// the level labels of a categorical one.
std::vector<GridValue> default_grid(const SearchSpace& space, const VariableRef& var, int count);

/// Representative conditioning levels: range quantiles for a quantitative
/// variable, the levels themselves for a categorical one.
std::vector<GridValue> default_levels(const SearchSpace& space, const VariableRef& var, int count);

/// Main effect of a shared quantitative or branch variable. A nested
/// variable is rejected here (its marginal is undefined while the parent
/// floats); use interaction_effect, which pins the parent. The same n_mc
/// draws of the remaining variables are reused across grid points, so curves
/// are smooth and point differences are conservative against the reported
/// standard errors. Deterministic given seed.
EffectCurve main_effect(const TrainedGP& gp, const std::string& var,
                        const std::vector<GridValue>& grid, int n_mc, std::uint64_t seed);

/// One curve per conditioning level: E[posterior mean | var1 = g, var2 = l],
/// averaged over everything else. A nested variable (either slot) fixes its
/// parent branch to the enabling level for all draws. Throws on incompatible
/// nesting (var1, var2 nested under different levels of the same branch, or
/// one variable being the other's parent).
std::vector<EffectCurve> interaction_effect(const TrainedGP& gp, const std::string& var1,
                                            const std::string& var2,
                                            const std::vector<GridValue>& grid1,
                                            const std::vector<GridValue>& levels2, int n_mc,
                                            std::uint64_t seed);

/// CSV emit (columns: variable, grid_value, conditioning_level, mean,
/// std_err, n_mc).
void write_effects_csv(std::ostream& os, const std::vector<EffectCurve>& curves);

}  // namespace bnopt
