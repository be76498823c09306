#include "bnopt/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "bnopt/rng.hpp"

namespace bnopt {

VariableRef resolve_variable(const SearchSpace& space, const std::string& ref) {
  std::string name = ref;
  std::string parent, level;
  if (auto at = ref.find('@'); at != std::string::npos) {
    name = ref.substr(0, at);
    std::string rest = ref.substr(at + 1);
    auto eq = rest.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("variable reference '" + ref + "': expected name@parent=level");
    parent = rest.substr(0, eq);
    level = rest.substr(eq + 1);
  }

  if (parent.empty()) {
    for (std::size_t i = 0; i < space.quant().size(); ++i)
      if (space.quant()[i].name == name)
        return {VariableRef::Kind::shared_quant, static_cast<int>(i), name};
    for (std::size_t k = 0; k < space.branch().size(); ++k)
      if (space.branch()[k].name == name)
        return {VariableRef::Kind::branch, static_cast<int>(k), name};
  }

  std::vector<int> matches;
  for (std::size_t j = 0; j < space.nested().size(); ++j) {
    const auto& v = space.nested()[j];
    if (v.name != name) continue;
    if (!parent.empty() && (v.parent != parent || v.parent_level != level)) continue;
    matches.push_back(static_cast<int>(j));
  }
  if (matches.empty()) throw std::invalid_argument("unknown variable '" + ref + "'");
  if (matches.size() > 1)
    throw std::invalid_argument("variable '" + name +
                                "' is declared under several levels; qualify it as " + name +
                                "@parent=level");
  const auto& v = space.nested()[static_cast<std::size_t>(matches[0])];
  return {VariableRef::Kind::nested, matches[0],
          v.name + "@" + v.parent + "=" + v.parent_level};
}

std::vector<GridValue> default_grid(const SearchSpace& space, const VariableRef& var, int count) {
  std::vector<GridValue> out;
  if (var.kind == VariableRef::Kind::branch) {
    for (const auto& l : space.branch()[static_cast<std::size_t>(var.index)].levels)
      out.emplace_back(l);
    return out;
  }
  if (var.kind == VariableRef::Kind::nested) {
    const auto& v = space.nested()[static_cast<std::size_t>(var.index)];
    if (v.kind == NestedKind::qualitative) {
      for (const auto& l : v.levels) out.emplace_back(l);
      return out;
    }
    for (int i = 0; i < count; ++i)
      out.emplace_back(v.lower + (v.upper - v.lower) * i / static_cast<double>(count - 1));
    return out;
  }
  const auto& q = space.quant()[static_cast<std::size_t>(var.index)];
  for (int i = 0; i < count; ++i) {
    double u = count == 1 ? 0.5 : i / static_cast<double>(count - 1);
    if (q.scale == Scale::log10) {
      double lo = std::log10(q.lower), hi = std::log10(q.upper);
      out.emplace_back(std::pow(10.0, lo + u * (hi - lo)));
    } else {
      out.emplace_back(q.lower + u * (q.upper - q.lower));
    }
  }
  return out;
}

std::vector<GridValue> default_levels(const SearchSpace& space, const VariableRef& var,
                                      int count) {
  if (var.kind != VariableRef::Kind::shared_quant &&
      !(var.kind == VariableRef::Kind::nested &&
        space.nested()[static_cast<std::size_t>(var.index)].kind == NestedKind::quantitative))
    return default_grid(space, var, count);
  // Range quantiles of the uniform averaging measure, in model scale.
  std::vector<GridValue> out;
  for (int i = 0; i < count; ++i) {
    double u = (i + 0.5) / static_cast<double>(count);
    if (var.kind == VariableRef::Kind::shared_quant) {
      const auto& q = space.quant()[static_cast<std::size_t>(var.index)];
      if (q.scale == Scale::log10) {
        double lo = std::log10(q.lower), hi = std::log10(q.upper);
        out.emplace_back(std::pow(10.0, lo + u * (hi - lo)));
      } else {
        out.emplace_back(q.lower + u * (q.upper - q.lower));
      }
    } else {
      const auto& v = space.nested()[static_cast<std::size_t>(var.index)];
      out.emplace_back(v.lower + u * (v.upper - v.lower));
    }
  }
  return out;
}

namespace {

// A fixed part of a conditional draw.
struct Fixed {
  std::map<int, double> quant_unit;    // shared dim -> unit value
  std::map<int, int> branch_level;     // branch idx -> level idx
  std::map<int, double> nested_unit;   // nested idx -> unit value
  std::map<int, int> nested_level;     // nested idx -> level idx
};

// One row of common random numbers: enough uniforms to materialize any
// conditional configuration, whatever the fixed assignment activates.
struct DrawRow {
  std::vector<double> quant;   // per shared dim
  std::vector<double> branch;  // per branch var
  std::vector<double> nested;  // per nested var
};

EncodedPoint materialize(const Encoder& enc, const DrawRow& row, const Fixed& fixed) {
  const SearchSpace& space = enc.space();
  EncodedPoint p;
  const auto d = static_cast<Eigen::Index>(enc.quant_dims());
  p.quant.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    auto it = fixed.quant_unit.find(static_cast<int>(i));
    p.quant[i] = it != fixed.quant_unit.end() ? it->second : row.quant[static_cast<std::size_t>(i)];
  }

  std::vector<int> levels(space.branch().size());
  for (std::size_t k = 0; k < space.branch().size(); ++k) {
    auto it = fixed.branch_level.find(static_cast<int>(k));
    if (it != fixed.branch_level.end()) {
      levels[k] = it->second;
    } else {
      auto count = static_cast<double>(space.branch()[k].levels.size());
      levels[k] = std::min(static_cast<int>(row.branch[k] * count),
                           static_cast<int>(count) - 1);
    }
  }

  // Locate the combo for the drawn branch levels plus active qualitative
  // nested levels.
  ComboAssignment key;
  key.branch_level = levels;
  key.nested_level.assign(space.nested().size(), -1);
  key.nested_active.assign(space.nested().size(), false);
  p.nested_quant = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(enc.nested_quant_dims()),
                                             kInactivePlaceholder);
  for (std::size_t j = 0; j < space.nested().size(); ++j) {
    const auto& v = space.nested()[j];
    int k = space.branch_index(v.parent);
    int b = space.level_index(k, v.parent_level);
    if (levels[static_cast<std::size_t>(k)] != b) continue;
    key.nested_active[j] = true;
    if (v.kind == NestedKind::qualitative) {
      auto it = fixed.nested_level.find(static_cast<int>(j));
      if (it != fixed.nested_level.end()) {
        key.nested_level[j] = it->second;
      } else {
        auto count = static_cast<double>(v.levels.size());
        key.nested_level[j] =
            std::min(static_cast<int>(row.nested[j] * count), static_cast<int>(count) - 1);
      }
    } else {
      auto it = fixed.nested_unit.find(static_cast<int>(j));
      double u = it != fixed.nested_unit.end() ? it->second : row.nested[j];
      p.nested_quant[enc.nested_quant_slot(static_cast<int>(j))] = u;
    }
  }
  const auto& combos = enc.combos();
  auto pos = std::find(combos.begin(), combos.end(), key);
  p.combo = static_cast<int>(pos - combos.begin());
  return p;
}

std::vector<DrawRow> sample_rows(const SearchSpace& space, int n_mc, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<DrawRow> rows(static_cast<std::size_t>(n_mc));
  for (auto& r : rows) {
    r.quant.resize(space.quant().size());
    for (auto& u : r.quant) u = uniform01(rng);
    r.branch.resize(space.branch().size());
    for (auto& u : r.branch) u = uniform01(rng);
    r.nested.resize(space.nested().size());
    for (auto& u : r.nested) u = uniform01(rng);
  }
  return rows;
}

// Apply "var = value" to a Fixed block.
void assign(const Encoder& enc, Fixed& fixed, const VariableRef& var, const GridValue& value) {
  const SearchSpace& space = enc.space();
  switch (var.kind) {
    case VariableRef::Kind::shared_quant:
      fixed.quant_unit[var.index] = enc.quant_to_unit(static_cast<std::size_t>(var.index),
                                                      std::get<double>(value));
      return;
    case VariableRef::Kind::branch: {
      int b = space.level_index(var.index, std::get<std::string>(value));
      if (b < 0) throw std::invalid_argument("unknown level for '" + var.display + "'");
      fixed.branch_level[var.index] = b;
      return;
    }
    case VariableRef::Kind::nested: {
      const auto& v = space.nested()[static_cast<std::size_t>(var.index)];
      int k = space.branch_index(v.parent);
      int b = space.level_index(k, v.parent_level);
      auto it = fixed.branch_level.find(k);
      if (it != fixed.branch_level.end() && it->second != b)
        throw std::invalid_argument("incompatible nesting: '" + var.display +
                                    "' requires " + v.parent + "=" + v.parent_level);
      fixed.branch_level[k] = b;  // pin the enabling parent level
      if (v.kind == NestedKind::qualitative) {
        const auto& label = std::get<std::string>(value);
        auto lpos = std::find(v.levels.begin(), v.levels.end(), label);
        if (lpos == v.levels.end())
          throw std::invalid_argument("unknown level for '" + var.display + "'");
        fixed.nested_level[var.index] = static_cast<int>(lpos - v.levels.begin());
      } else {
        fixed.nested_unit[var.index] = enc.nested_to_unit(var.index, std::get<double>(value));
      }
      return;
    }
  }
}

std::string to_label(const GridValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", std::get<double>(v));
  return buf;
}

EffectCurve average_over_draws(const TrainedGP& gp, const VariableRef& var,
                               const std::vector<GridValue>& grid, const Fixed& base,
                               const std::vector<DrawRow>& rows, int n_mc) {
  const Encoder& enc = gp.encoder();
  EffectCurve curve;
  curve.variable = var.display;
  curve.grid = grid;
  curve.n_mc = n_mc;
  for (const auto& g : grid) {
    Fixed fixed = base;
    assign(enc, fixed, var, g);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& row : rows) {
      double m = gp.posterior(materialize(enc, row, fixed)).mean;
      sum += m;
      sumsq += m * m;
    }
    double mean = sum / n_mc;
    double var_hat = std::max(0.0, sumsq / n_mc - mean * mean);
    curve.values.push_back(mean);
    curve.std_err.push_back(std::sqrt(var_hat / n_mc));
  }
  return curve;
}

}  // namespace

EffectCurve main_effect(const TrainedGP& gp, const std::string& var,
                        const std::vector<GridValue>& grid, int n_mc, std::uint64_t seed) {
  const SearchSpace& space = gp.encoder().space();
  VariableRef ref = resolve_variable(space, var);
  if (ref.kind == VariableRef::Kind::nested)
    throw std::invalid_argument(
        "main_effect: '" + ref.display +
        "' is nested and has no unconditional marginal; use interaction_effect (or a "
        "conditional grid) so its parent branch is pinned to the enabling level");
  auto rows = sample_rows(space, n_mc, seed);
  return average_over_draws(gp, ref, grid, Fixed{}, rows, n_mc);
}

std::vector<EffectCurve> interaction_effect(const TrainedGP& gp, const std::string& var1,
                                            const std::string& var2,
                                            const std::vector<GridValue>& grid1,
                                            const std::vector<GridValue>& levels2, int n_mc,
                                            std::uint64_t seed) {
  const Encoder& enc = gp.encoder();
  const SearchSpace& space = enc.space();
  VariableRef ref1 = resolve_variable(space, var1);
  VariableRef ref2 = resolve_variable(space, var2);

  // Nested variables pin their parent for every draw; clashes surface here.
  Fixed base;
  for (const auto* r : {&ref1, &ref2}) {
    if (r->kind != VariableRef::Kind::nested) continue;
    const auto& v = space.nested()[static_cast<std::size_t>(r->index)];
    int k = space.branch_index(v.parent);
    int b = space.level_index(k, v.parent_level);
    auto it = base.branch_level.find(k);
    if (it != base.branch_level.end() && it->second != b)
      throw std::invalid_argument("incompatible nesting: '" + ref1.display + "' and '" +
                                  ref2.display + "' live under different levels of '" + v.parent +
                                  "'");
    base.branch_level[k] = b;
  }
  if (ref2.kind == VariableRef::Kind::branch && ref1.kind == VariableRef::Kind::nested &&
      space.nested()[static_cast<std::size_t>(ref1.index)].parent ==
          space.branch()[static_cast<std::size_t>(ref2.index)].name)
    throw std::invalid_argument("incompatible nesting: '" + ref2.display + "' is the parent of '" +
                                ref1.display + "' and cannot vary while it is active");
  if (ref1.kind == VariableRef::Kind::branch && ref2.kind == VariableRef::Kind::nested &&
      space.nested()[static_cast<std::size_t>(ref2.index)].parent ==
          space.branch()[static_cast<std::size_t>(ref1.index)].name)
    throw std::invalid_argument("incompatible nesting: '" + ref1.display + "' is the parent of '" +
                                ref2.display + "' and cannot vary while it is active");

  auto rows = sample_rows(space, n_mc, seed);
  std::vector<EffectCurve> out;
  for (const auto& level : levels2) {
    Fixed fixed = base;
    assign(enc, fixed, ref2, level);
    EffectCurve curve = average_over_draws(gp, ref1, grid1, fixed, rows, n_mc);
    curve.conditioning_variable = ref2.display;
    curve.conditioning_level = to_label(level);
    out.push_back(std::move(curve));
  }
  return out;
}

void write_effects_csv(std::ostream& os, const std::vector<EffectCurve>& curves) {
  os << "variable,grid_value,conditioning_level,mean,std_err,n_mc\n";
  char buf[64];
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      os << c.variable << "," << to_label(c.grid[i]) << ",";
      if (!c.conditioning_variable.empty())
        os << c.conditioning_variable << "=" << c.conditioning_level;
      std::snprintf(buf, sizeof(buf), ",%.12g,%.12g,%d\n", c.values[i], c.std_err[i], c.n_mc);
      os << buf;
    }
  }
}

}  // namespace bnopt
