#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bnopt/search_space.hpp"
#include "bnopt/study.hpp"

namespace bnopt {

/// A named synthetic objective with its canonical search space.
struct SyntheticObjective {
  std::string name;
  SearchSpace space;
  double noise_sd = 0.0;
  std::optional<std::pair<Configuration, double>> true_optimum;
  std::function<double(const Configuration&)> truth;
};

/// Two-Gaussian-bump synthetic surface over two continuous variables and one
/// branching/nested pair:
///   f = (v/2) exp(-(x1-c1)^2) + (2/v) exp(-(x1-c2)^2/10) + 1/(x2^2+1) + z
/// with (c1, c2) = (3 - v/2, 5 - v) under z=1 and (-1 + v, 7 - v) under z=2.
/// Gaussian observation noise with the given sd is added from the seed.
/// Throws std::invalid_argument outside x1 in [-10,10], x2 in [-5,5], or on a
/// (z, v) pair not among the five legal combos.
double eval_bn2d(double x1, double x2, int z, int v, double noise_sd, std::uint64_t seed);

/// The search space of eval_bn2d: x1, x2 quantitative; z branching with
/// levels {1,2}; v qualitative nested with levels {1,2,3} under z=1 and
/// {1,2} under z=2.
SearchSpace bn2d_space();

/// The CNN-tuning search space shape (five shared variables, network type
/// branching into depth / width-multiplier choices). Ships for exercising
/// the ask-tell path; the matching builtin "mock_cnn" is a fixed smooth
/// pseudo-accuracy surface, not a trained network.
SearchSpace cnn_space();

/// Deterministic smooth mock accuracy in (0, 1) over cnn_space().
double eval_mock_cnn(const Configuration& cfg, double noise_sd, std::uint64_t seed);

/// Resolve a builtin objective ("bn2d", "mock_cnn") to an evaluable
/// Objective. Throws std::invalid_argument for unknown names.
Objective make_builtin_objective(const std::string& name, double noise_sd);
Objective make_builtin_objective(const ObjectiveSpec& spec);

/// Canonical space of a builtin name.
SearchSpace builtin_space(const std::string& name);

}  // namespace bnopt
