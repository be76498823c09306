#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bnopt/rng.hpp"
#include "bnopt/search_space.hpp"

namespace bnopt {

/// Randomized Latin hypercube on the unit cube: one point per stratum
/// [i/n, (i+1)/n) in every dimension. Rows are points.
Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t dims, Rng& rng);

/// Space-filling initial design: quantitative coordinates (shared and nested)
/// follow a Latin hypercube in n strata; categorical combos are assigned by
/// cycling through a random permutation of the L combos, so each combo
/// receives floor(n/L) or ceil(n/L) points. Deterministic given seed.
std::vector<Configuration> sample_initial_design(const SearchSpace& space, std::size_t n,
                                                 std::uint64_t seed);

class Encoder;

/// One uniformly random valid configuration: uniform in model scale for
/// quantitative variables, uniform over the L categorical combos, active
/// nested quantitative values uniform in their ranges.
Configuration random_configuration(const Encoder& enc, Rng& rng);
Configuration random_configuration(const SearchSpace& space, Rng& rng);

}  // namespace bnopt
