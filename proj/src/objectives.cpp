#include "bnopt/objectives.hpp"

#include <cmath>
#include <stdexcept>

#include "bnopt/encoding.hpp"
#include "bnopt/rng.hpp"

namespace bnopt {

double eval_bn2d(double x1, double x2, int z, int v, double noise_sd, std::uint64_t seed) {
  if (x1 < -10.0 || x1 > 10.0) throw std::invalid_argument("bn2d: x1 outside [-10, 10]");
  if (x2 < -5.0 || x2 > 5.0) throw std::invalid_argument("bn2d: x2 outside [-5, 5]");
  double c1, c2;
  if (z == 1 && v >= 1 && v <= 3) {
    c1 = 3.0 - 0.5 * v;
    c2 = 5.0 - v;
  } else if (z == 2 && (v == 1 || v == 2)) {
    c1 = -1.0 + v;
    c2 = 7.0 - v;
  } else {
    throw std::invalid_argument("bn2d: illegal (z, v) combination");
  }
  const double vd = static_cast<double>(v);
  double f = 0.5 * vd * std::exp(-(x1 - c1) * (x1 - c1)) +
             (2.0 / vd) * std::exp(-0.1 * (x1 - c2) * (x1 - c2)) + 1.0 / (x2 * x2 + 1.0) +
             static_cast<double>(z);
  if (noise_sd > 0.0) {
    Rng rng = make_rng(seed);
    f += normal(rng, 0.0, noise_sd);
  }
  return f;
}

SearchSpace bn2d_space() {
  return SearchSpace(
      {{"x1", -10.0, 10.0, Scale::linear}, {"x2", -5.0, 5.0, Scale::linear}},
      {{"z", {"1", "2"}}},
      {{"v", "z", "1", NestedKind::qualitative, 0, 1, {"1", "2", "3"}},
       {"v", "z", "2", NestedKind::qualitative, 0, 1, {"1", "2"}}});
}

SearchSpace cnn_space() {
  return SearchSpace(
      {{"lr", 0.001, 1.0, Scale::log10},
       {"epoch", 50.0, 200.0, Scale::linear},
       {"batch", 64.0, 360.0, Scale::linear},
       {"momentum", 0.0, 0.999, Scale::linear},
       {"wd", 1e-6, 0.999, Scale::log10}},
      {{"network", {"resnet", "mobilenet"}}},
      {{"depth", "network", "resnet", NestedKind::qualitative, 0, 1, {"18", "34", "50", "101"}},
       {"multiplier", "network", "mobilenet", NestedKind::qualitative, 0, 1,
        {"0.25", "0.5", "1.0"}}});
}

namespace {

int parse_level_int(const Configuration& cfg, const std::string& name) {
  auto it = cfg.nested_values.find(name);
  if (it != cfg.nested_values.end())
    return std::stoi(std::get<std::string>(it->second));
  return std::stoi(cfg.branch_values.at(name));
}

}  // namespace

double eval_mock_cnn(const Configuration& cfg, double noise_sd, std::uint64_t seed) {
  static const Encoder enc(cnn_space());
  EncodedPoint p = enc.encode(cfg);

  // Fixed pseudo-random smooth surface: per-dimension cosine waves with
  // per-combo amplitude/offset twists.
  const std::uint64_t key = 0x5eedc0ffee15f00dULL;
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.quant.size(); ++i) {
    Rng rng = make_rng(key, static_cast<std::uint64_t>(i));
    double a = 0.4 + 0.6 * uniform01(rng);
    double w = 1.0 + 2.0 * uniform01(rng);
    double c = uniform01(rng);
    h += a * std::cos(2.0 * M_PI * (w * p.quant[i] + c));
  }
  {
    Rng rng = make_rng(key, 100 + static_cast<std::uint64_t>(p.combo));
    h += 0.8 * (uniform01(rng) - 0.5);
  }
  double acc = 0.55 + 0.4 / (1.0 + std::exp(-h));
  if (noise_sd > 0.0) {
    Rng rng = make_rng(seed);
    acc += normal(rng, 0.0, noise_sd);
  }
  return acc;
}

Objective make_builtin_objective(const std::string& name, double noise_sd) {
  Objective obj;
  obj.spec = {ObjectiveSpec::Kind::builtin, name, noise_sd};
  if (name == "bn2d") {
    obj.eval = [noise_sd](const Configuration& cfg, std::uint64_t seed) {
      return eval_bn2d(cfg.quant_values.at("x1"), cfg.quant_values.at("x2"),
                       std::stoi(cfg.branch_values.at("z")), parse_level_int(cfg, "v"), noise_sd,
                       seed);
    };
    obj.truth = [](const Configuration& cfg) {
      return eval_bn2d(cfg.quant_values.at("x1"), cfg.quant_values.at("x2"),
                       std::stoi(cfg.branch_values.at("z")), parse_level_int(cfg, "v"), 0.0, 0);
    };
  } else if (name == "mock_cnn") {
    obj.eval = [noise_sd](const Configuration& cfg, std::uint64_t seed) {
      return eval_mock_cnn(cfg, noise_sd, seed);
    };
    obj.truth = [](const Configuration& cfg) { return eval_mock_cnn(cfg, 0.0, 0); };
  } else {
    throw std::invalid_argument("unknown builtin objective '" + name + "'");
  }
  return obj;
}

Objective make_builtin_objective(const ObjectiveSpec& spec) {
  if (spec.kind != ObjectiveSpec::Kind::builtin)
    throw std::invalid_argument("objective is external; drive it via suggest/tell");
  return make_builtin_objective(spec.name, spec.noise_sd);
}

SearchSpace builtin_space(const std::string& name) {
  if (name == "bn2d") return bn2d_space();
  if (name == "mock_cnn") return cnn_space();
  throw std::invalid_argument("unknown builtin objective '" + name + "'");
}

}  // namespace bnopt
