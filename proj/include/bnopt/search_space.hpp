#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace bnopt {

enum class Scale { linear, log10 };

/// A quantitative variable shared by every configuration.
struct QuantVarSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
};

/// A branching (categorical) variable; its chosen level decides which nested
/// variables exist.
struct BranchVarSpec {
  std::string name;
  std::vector<std::string> levels;  // >= 2, unique labels
};

enum class NestedKind { quantitative, qualitative };

/// A variable that is only active when `parent` takes `parent_level`.
/// Nested variables under different levels of the same branch may share a
/// name (at most one of them is ever active); any other name collision is
/// rejected at construction.
struct NestedVarSpec {
  std::string name;
  std::string parent;
  std::string parent_level;
  NestedKind kind = NestedKind::quantitative;
  double lower = 0.0;   // quantitative
  double upper = 1.0;   // quantitative
  std::vector<std::string> levels;  // qualitative, >= 2
};

/// One point of the search space. Branch values are level labels; a nested
/// value is present exactly when its parent branch takes the enabling level.
struct Configuration {
  using NestedValue = std::variant<double, std::string>;

  std::map<std::string, double> quant_values;
  std::map<std::string, std::string> branch_values;
  std::map<std::string, NestedValue> nested_values;

  bool operator==(const Configuration&) const = default;
};

/// Declarative mixed search space. Immutable after construction; the
/// constructor throws std::invalid_argument on any malformed declaration
/// (bad bounds, duplicate names, dangling parent references).
class SearchSpace {
 public:
  SearchSpace() = default;
  SearchSpace(std::vector<QuantVarSpec> quant, std::vector<BranchVarSpec> branch,
              std::vector<NestedVarSpec> nested);

  const std::vector<QuantVarSpec>& quant() const { return quant_; }
  const std::vector<BranchVarSpec>& branch() const { return branch_; }
  const std::vector<NestedVarSpec>& nested() const { return nested_; }

  /// Total declared dimension p = d + q + sum_k m_k.
  std::size_t dimension() const { return quant_.size() + branch_.size() + nested_.size(); }

  int branch_index(const std::string& name) const;             // -1 if absent
  int level_index(int branch_idx, const std::string& level) const;  // -1 if absent

  /// Nested variables declared under (branch, level), in declaration order,
  /// as indices into nested().
  std::vector<int> nested_under(int branch_idx, int level_idx) const;

  /// Index into nested() of the variable `name` active under the given full
  /// branch assignment; -1 when no such variable is active.
  int active_nested_index(const std::string& name,
                          const std::map<std::string, std::string>& branch_values) const;

 private:
  void check() const;

  std::vector<QuantVarSpec> quant_;
  std::vector<BranchVarSpec> branch_;
  std::vector<NestedVarSpec> nested_;
};

/// All invariant violations of `cfg` against `space` (empty means valid).
/// Violations are data, not failures: bad bounds, inactive nested values,
/// missing active ones, unknown or missing names.
std::vector<std::string> validate(const SearchSpace& space, const Configuration& cfg);

/// One full joint assignment of branch levels and active qualitative nested
/// levels. Quantitative nested variables contribute ranges, not enumeration
/// entries, so they carry no level here.
struct ComboAssignment {
  std::vector<int> branch_level;   // per branch variable, index into its levels
  std::vector<int> nested_level;   // per nested variable: level index, or -1
  std::vector<bool> nested_active; // per nested variable

  bool operator==(const ComboAssignment&) const = default;
};

/// Enumerate the L distinct categorical combinations in a fixed order:
/// branch variables as an odometer in declaration order (first slowest),
/// active qualitative nested levels innermost.
std::vector<ComboAssignment> enumerate_categorical_combos(const SearchSpace& space);

/// Human-readable label, e.g. "z=2,v=1".
std::string combo_label(const SearchSpace& space, const ComboAssignment& combo);

}  // namespace bnopt
