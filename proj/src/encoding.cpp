#include "bnopt/encoding.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bnopt {

namespace {

double to_model(double value, Scale scale) {
  return scale == Scale::log10 ? std::log10(value) : value;
}

double from_model(double value, Scale scale) {
  return scale == Scale::log10 ? std::pow(10.0, value) : value;
}

}  // namespace

Encoder::Encoder(SearchSpace space)
    : space_(std::move(space)), combos_(enumerate_categorical_combos(space_)) {
  nested_slot_.assign(space_.nested().size(), -1);
  for (std::size_t j = 0; j < space_.nested().size(); ++j) {
    if (space_.nested()[j].kind == NestedKind::quantitative) {
      nested_slot_[j] = static_cast<int>(nested_quant_index_.size());
      nested_quant_index_.push_back(static_cast<int>(j));
    }
  }
  active_slots_.resize(combos_.size());
  for (std::size_t c = 0; c < combos_.size(); ++c) {
    for (std::size_t j = 0; j < space_.nested().size(); ++j)
      if (combos_[c].nested_active[j] && nested_slot_[j] >= 0)
        active_slots_[c].push_back(nested_slot_[j]);
  }
}

double Encoder::quant_to_unit(std::size_t dim, double value) const {
  const auto& q = space_.quant().at(dim);
  double lo = to_model(q.lower, q.scale), hi = to_model(q.upper, q.scale);
  return (to_model(value, q.scale) - lo) / (hi - lo);
}

double Encoder::quant_from_unit(std::size_t dim, double u) const {
  const auto& q = space_.quant().at(dim);
  double lo = to_model(q.lower, q.scale), hi = to_model(q.upper, q.scale);
  return from_model(lo + u * (hi - lo), q.scale);
}

double Encoder::nested_to_unit(int nested_idx, double value) const {
  const auto& v = space_.nested().at(static_cast<std::size_t>(nested_idx));
  return (value - v.lower) / (v.upper - v.lower);
}

double Encoder::nested_from_unit(int nested_idx, double u) const {
  const auto& v = space_.nested().at(static_cast<std::size_t>(nested_idx));
  return v.lower + u * (v.upper - v.lower);
}

int Encoder::combo_of(const Configuration& cfg) const {
  ComboAssignment key;
  const std::size_t q = space_.branch().size();
  const std::size_t m = space_.nested().size();
  key.branch_level.assign(q, 0);
  key.nested_level.assign(m, -1);
  key.nested_active.assign(m, false);

  for (std::size_t k = 0; k < q; ++k) {
    auto it = cfg.branch_values.find(space_.branch()[k].name);
    if (it == cfg.branch_values.end())
      throw std::invalid_argument("combo_of: missing branch value '" + space_.branch()[k].name + "'");
    int b = space_.level_index(static_cast<int>(k), it->second);
    if (b < 0)
      throw std::invalid_argument("combo_of: unknown level '" + it->second + "'");
    key.branch_level[k] = b;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto& v = space_.nested()[j];
    auto pit = cfg.branch_values.find(v.parent);
    bool active = pit != cfg.branch_values.end() && pit->second == v.parent_level;
    key.nested_active[j] = active;
    if (!active || v.kind != NestedKind::qualitative) continue;
    auto it = cfg.nested_values.find(v.name);
    if (it == cfg.nested_values.end())
      throw std::invalid_argument("combo_of: missing nested value '" + v.name + "'");
    const std::string* label = std::get_if<std::string>(&it->second);
    if (!label) throw std::invalid_argument("combo_of: nested '" + v.name + "' must be a level");
    for (std::size_t b = 0; b < v.levels.size(); ++b)
      if (v.levels[b] == *label) key.nested_level[j] = static_cast<int>(b);
    if (key.nested_level[j] < 0)
      throw std::invalid_argument("combo_of: nested '" + v.name + "' has no level '" + *label + "'");
  }

  for (std::size_t c = 0; c < combos_.size(); ++c)
    if (combos_[c] == key) return static_cast<int>(c);
  throw std::invalid_argument("combo_of: assignment not in combo table");
}

EncodedPoint Encoder::encode(const Configuration& cfg) const {
  auto violations = validate(space_, cfg);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "encode: invalid configuration:";
    for (const auto& v : violations) os << " [" << v << "]";
    throw std::invalid_argument(os.str());
  }

  EncodedPoint p;
  p.quant.resize(static_cast<Eigen::Index>(space_.quant().size()));
  for (std::size_t i = 0; i < space_.quant().size(); ++i)
    p.quant[static_cast<Eigen::Index>(i)] =
        quant_to_unit(i, cfg.quant_values.at(space_.quant()[i].name));

  p.combo = combo_of(cfg);

  p.nested_quant = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(nested_quant_index_.size()), kInactivePlaceholder);
  const auto& combo = combos_[static_cast<std::size_t>(p.combo)];
  for (std::size_t slot = 0; slot < nested_quant_index_.size(); ++slot) {
    int j = nested_quant_index_[slot];
    if (!combo.nested_active[static_cast<std::size_t>(j)]) continue;
    const auto& v = space_.nested()[static_cast<std::size_t>(j)];
    double raw = std::get<double>(cfg.nested_values.at(v.name));
    p.nested_quant[static_cast<Eigen::Index>(slot)] = nested_to_unit(j, raw);
  }
  return p;
}

Configuration Encoder::decode(const EncodedPoint& p) const {
  Configuration cfg;
  for (std::size_t i = 0; i < space_.quant().size(); ++i)
    cfg.quant_values[space_.quant()[i].name] =
        quant_from_unit(i, p.quant[static_cast<Eigen::Index>(i)]);

  const auto& combo = combos_.at(static_cast<std::size_t>(p.combo));
  for (std::size_t k = 0; k < space_.branch().size(); ++k)
    cfg.branch_values[space_.branch()[k].name] =
        space_.branch()[k].levels[static_cast<std::size_t>(combo.branch_level[k])];

  for (std::size_t j = 0; j < space_.nested().size(); ++j) {
    if (!combo.nested_active[j]) continue;
    const auto& v = space_.nested()[j];
    if (v.kind == NestedKind::qualitative) {
      cfg.nested_values[v.name] = v.levels[static_cast<std::size_t>(combo.nested_level[j])];
    } else {
      int slot = nested_slot_[j];
      cfg.nested_values[v.name] =
          nested_from_unit(static_cast<int>(j), p.nested_quant[static_cast<Eigen::Index>(slot)]);
    }
  }
  return cfg;
}

}  // namespace bnopt
