#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bnopt/search_space.hpp"

namespace bnopt {

/// Numeric image of a Configuration. Quantitative values live in model scale
/// (log10 first when declared, then affinely mapped to [0,1]); the combo index
/// fixes all branch levels and active qualitative nested levels. Inactive
/// nested slots hold a canonical placeholder that never enters kernel
/// distances.
struct EncodedPoint {
  Eigen::VectorXd quant;         // shared quantitative, unit scale
  int combo = 0;                 // index into Encoder::combos()
  Eigen::VectorXd nested_quant;  // one slot per quantitative nested variable, unit scale
};

inline constexpr double kInactivePlaceholder = 0.5;

/// Bidirectional Configuration <-> EncodedPoint map for one space, plus the
/// precomputed combo table. Immutable; cheap to copy.
class Encoder {
 public:
  explicit Encoder(SearchSpace space);

  const SearchSpace& space() const { return space_; }
  const std::vector<ComboAssignment>& combos() const { return combos_; }
  std::size_t combo_count() const { return combos_.size(); }

  std::size_t quant_dims() const { return space_.quant().size(); }
  std::size_t nested_quant_dims() const { return nested_quant_index_.size(); }

  /// Slot in EncodedPoint::nested_quant for nested variable j, or -1.
  int nested_quant_slot(int nested_idx) const { return nested_slot_[static_cast<std::size_t>(nested_idx)]; }
  /// Inverse of nested_quant_slot.
  int nested_index_of_slot(int slot) const { return nested_quant_index_[static_cast<std::size_t>(slot)]; }

  /// Combo index of a configuration's categorical assignment (throws on an
  /// assignment that is not in the table).
  int combo_of(const Configuration& cfg) const;

  /// Unit-scale image of a valid configuration. Throws std::invalid_argument
  /// when validate() reports violations.
  EncodedPoint encode(const Configuration& cfg) const;

  /// Round-trip back to a configuration; inactive placeholders are dropped.
  Configuration decode(const EncodedPoint& p) const;

  double quant_to_unit(std::size_t dim, double value) const;
  double quant_from_unit(std::size_t dim, double u) const;
  double nested_to_unit(int nested_idx, double value) const;
  double nested_from_unit(int nested_idx, double u) const;

  /// Nested-quant slots active under a combo.
  const std::vector<int>& active_slots(int combo) const {
    return active_slots_[static_cast<std::size_t>(combo)];
  }

 private:
  SearchSpace space_;
  std::vector<ComboAssignment> combos_;
  std::vector<int> nested_slot_;         // per nested var -> slot or -1
  std::vector<int> nested_quant_index_;  // per slot -> nested var index
  std::vector<std::vector<int>> active_slots_;  // per combo
};

}  // namespace bnopt
