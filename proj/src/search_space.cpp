#include "bnopt/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bnopt {

SearchSpace::SearchSpace(std::vector<QuantVarSpec> quant, std::vector<BranchVarSpec> branch,
                         std::vector<NestedVarSpec> nested)
    : quant_(std::move(quant)), branch_(std::move(branch)), nested_(std::move(nested)) {
  check();
}

void SearchSpace::check() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("search space: " + msg); };

  std::set<std::string> top_names;
  auto claim = [&](const std::string& name) {
    if (name.empty()) fail("empty variable name");
    if (!top_names.insert(name).second) fail("duplicate variable name '" + name + "'");
  };

  for (const auto& q : quant_) {
    claim(q.name);
    if (!(q.lower < q.upper))
      fail("variable '" + q.name + "': lower must be < upper");
    if (q.scale == Scale::log10 && !(q.lower > 0.0))
      fail("variable '" + q.name + "': log10 scale requires lower > 0");
    if (!std::isfinite(q.lower) || !std::isfinite(q.upper))
      fail("variable '" + q.name + "': non-finite bounds");
  }

  for (const auto& b : branch_) {
    claim(b.name);
    if (b.levels.size() < 2) fail("branch '" + b.name + "' needs at least 2 levels");
    std::set<std::string> seen(b.levels.begin(), b.levels.end());
    if (seen.size() != b.levels.size()) fail("branch '" + b.name + "' has duplicate levels");
  }

  // Nested names may repeat across levels of the same parent (mutually
  // exclusive activity); everything else must stay unique.
  std::set<std::pair<std::string, std::string>> nested_slots;  // (name, parent_level)
  std::map<std::string, std::string> nested_parent_of;
  for (const auto& v : nested_) {
    if (v.name.empty()) fail("empty variable name");
    if (top_names.count(v.name)) fail("duplicate variable name '" + v.name + "'");
    int bi = branch_index(v.parent);
    if (bi < 0) fail("nested '" + v.name + "': unknown parent branch '" + v.parent + "'");
    if (level_index(bi, v.parent_level) < 0)
      fail("nested '" + v.name + "': '" + v.parent + "' has no level '" + v.parent_level + "'");
    auto it = nested_parent_of.find(v.name);
    if (it == nested_parent_of.end()) {
      nested_parent_of.emplace(v.name, v.parent);
    } else if (it->second != v.parent) {
      fail("nested name '" + v.name + "' reused under different branches");
    }
    if (!nested_slots.insert({v.name, v.parent_level}).second)
      fail("nested '" + v.name + "' declared twice under level '" + v.parent_level + "'");
    if (v.kind == NestedKind::quantitative) {
      if (!(v.lower < v.upper)) fail("nested '" + v.name + "': lower must be < upper");
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
        fail("nested '" + v.name + "': non-finite bounds");
    } else {
      if (v.levels.size() < 2) fail("nested '" + v.name + "' needs at least 2 levels");
      std::set<std::string> seen(v.levels.begin(), v.levels.end());
      if (seen.size() != v.levels.size()) fail("nested '" + v.name + "' has duplicate levels");
    }
  }
}

int SearchSpace::branch_index(const std::string& name) const {
  for (std::size_t k = 0; k < branch_.size(); ++k)
    if (branch_[k].name == name) return static_cast<int>(k);
  return -1;
}

int SearchSpace::level_index(int branch_idx, const std::string& level) const {
  const auto& levels = branch_.at(static_cast<std::size_t>(branch_idx)).levels;
  for (std::size_t b = 0; b < levels.size(); ++b)
    if (levels[b] == level) return static_cast<int>(b);
  return -1;
}

std::vector<int> SearchSpace::nested_under(int branch_idx, int level_idx) const {
  std::vector<int> out;
  const auto& bv = branch_.at(static_cast<std::size_t>(branch_idx));
  const auto& level = bv.levels.at(static_cast<std::size_t>(level_idx));
  for (std::size_t j = 0; j < nested_.size(); ++j)
    if (nested_[j].parent == bv.name && nested_[j].parent_level == level)
      out.push_back(static_cast<int>(j));
  return out;
}

int SearchSpace::active_nested_index(
    const std::string& name, const std::map<std::string, std::string>& branch_values) const {
  for (std::size_t j = 0; j < nested_.size(); ++j) {
    if (nested_[j].name != name) continue;
    auto it = branch_values.find(nested_[j].parent);
    if (it != branch_values.end() && it->second == nested_[j].parent_level)
      return static_cast<int>(j);
  }
  return -1;
}

std::vector<std::string> validate(const SearchSpace& space, const Configuration& cfg) {
  std::vector<std::string> out;
  auto bad = [&](const std::string& msg) { out.push_back(msg); };

  for (const auto& q : space.quant()) {
    auto it = cfg.quant_values.find(q.name);
    if (it == cfg.quant_values.end()) {
      bad("missing quantitative value '" + q.name + "'");
      continue;
    }
    if (!std::isfinite(it->second) || it->second < q.lower || it->second > q.upper)
      bad("value of '" + q.name + "' outside [" + std::to_string(q.lower) + ", " +
          std::to_string(q.upper) + "]");
  }
  for (const auto& [name, _] : cfg.quant_values) {
    bool known = std::any_of(space.quant().begin(), space.quant().end(),
                             [&](const QuantVarSpec& q) { return q.name == name; });
    if (!known) bad("unknown quantitative variable '" + name + "'");
  }

  for (const auto& b : space.branch()) {
    auto it = cfg.branch_values.find(b.name);
    if (it == cfg.branch_values.end()) {
      bad("missing branch value '" + b.name + "'");
      continue;
    }
    if (std::find(b.levels.begin(), b.levels.end(), it->second) == b.levels.end())
      bad("branch '" + b.name + "' has no level '" + it->second + "'");
  }
  for (const auto& [name, _] : cfg.branch_values) {
    if (space.branch_index(name) < 0) bad("unknown branch variable '" + name + "'");
  }

  // Activity rule: nested value present iff parent's branch value enables it.
  std::set<std::string> seen_nested;
  for (std::size_t j = 0; j < space.nested().size(); ++j) {
    const auto& v = space.nested()[j];
    auto pit = cfg.branch_values.find(v.parent);
    bool active = pit != cfg.branch_values.end() && pit->second == v.parent_level;
    auto it = cfg.nested_values.find(v.name);
    if (!active) continue;
    seen_nested.insert(v.name);
    if (it == cfg.nested_values.end()) {
      bad("missing active nested value '" + v.name + "'");
      continue;
    }
    if (v.kind == NestedKind::quantitative) {
      const double* val = std::get_if<double>(&it->second);
      if (!val) {
        bad("nested '" + v.name + "' must be numeric");
      } else if (!std::isfinite(*val) || *val < v.lower || *val > v.upper) {
        bad("value of '" + v.name + "' outside [" + std::to_string(v.lower) + ", " +
            std::to_string(v.upper) + "]");
      }
    } else {
      const std::string* val = std::get_if<std::string>(&it->second);
      if (!val) {
        bad("nested '" + v.name + "' must be a level label");
      } else if (std::find(v.levels.begin(), v.levels.end(), *val) == v.levels.end()) {
        bad("nested '" + v.name + "' has no level '" + *val + "'");
      }
    }
  }
  for (const auto& [name, _] : cfg.nested_values) {
    bool declared = std::any_of(space.nested().begin(), space.nested().end(),
                                [&](const NestedVarSpec& v) { return v.name == name; });
    if (!declared) {
      bad("unknown nested variable '" + name + "'");
    } else if (!seen_nested.count(name)) {
      bad("inactive nested value '" + name + "' present");
    }
  }

  return out;
}

std::vector<ComboAssignment> enumerate_categorical_combos(const SearchSpace& space) {
  const std::size_t q = space.branch().size();
  const std::size_t m = space.nested().size();

  std::vector<ComboAssignment> out;
  ComboAssignment cur;
  cur.branch_level.assign(q, 0);
  cur.nested_level.assign(m, -1);
  cur.nested_active.assign(m, false);

  // Qualitative nested variables active under a given full branch assignment.
  auto active_qual = [&](const std::vector<int>& branch_level) {
    std::vector<int> idx;
    for (std::size_t k = 0; k < q; ++k) {
      for (int j : space.nested_under(static_cast<int>(k), branch_level[k]))
        if (space.nested()[static_cast<std::size_t>(j)].kind == NestedKind::qualitative)
          idx.push_back(j);
    }
    return idx;
  };

  auto emit_nested = [&](const std::vector<int>& branch_level) {
    cur.nested_level.assign(m, -1);
    cur.nested_active.assign(m, false);
    for (std::size_t k = 0; k < q; ++k)
      for (int j : space.nested_under(static_cast<int>(k), branch_level[k]))
        cur.nested_active[static_cast<std::size_t>(j)] = true;

    std::vector<int> qual = active_qual(branch_level);
    std::vector<std::size_t> counter(qual.size(), 0);
    while (true) {
      for (std::size_t t = 0; t < qual.size(); ++t)
        cur.nested_level[static_cast<std::size_t>(qual[t])] = static_cast<int>(counter[t]);
      out.push_back(cur);
      // odometer, last variable fastest
      std::size_t t = qual.size();
      while (t > 0) {
        --t;
        const auto& levels = space.nested()[static_cast<std::size_t>(qual[t])].levels;
        if (++counter[t] < levels.size()) break;
        counter[t] = 0;
        if (t == 0) return;
      }
      if (qual.empty()) return;
    }
  };

  std::vector<int> branch_level(q, 0);
  while (true) {
    cur.branch_level = branch_level;
    emit_nested(branch_level);
    std::size_t k = q;
    while (k > 0) {
      --k;
      if (++branch_level[k] < static_cast<int>(space.branch()[k].levels.size())) break;
      branch_level[k] = 0;
      if (k == 0) return out;
    }
    if (q == 0) return out;
  }
}

std::string combo_label(const SearchSpace& space, const ComboAssignment& combo) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < space.branch().size(); ++k) {
    if (!first) os << ",";
    first = false;
    os << space.branch()[k].name << "="
       << space.branch()[k].levels[static_cast<std::size_t>(combo.branch_level[k])];
  }
  for (std::size_t j = 0; j < space.nested().size(); ++j) {
    if (combo.nested_level[j] < 0) continue;
    if (!first) os << ",";
    first = false;
    os << space.nested()[j].name << "="
       << space.nested()[j].levels[static_cast<std::size_t>(combo.nested_level[j])];
  }
  if (first) os << "-";
  return os.str();
}

}  // namespace bnopt
