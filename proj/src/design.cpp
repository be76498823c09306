#include "bnopt/design.hpp"

#include <algorithm>
#include <numeric>

#include "bnopt/encoding.hpp"

namespace bnopt {

Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t dims, Rng& rng) {
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  std::vector<std::size_t> order(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      double jitter = uniform01(rng);
      u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          (static_cast<double>(order[i]) + jitter) / static_cast<double>(n);
    }
  }
  return u;
}

std::vector<Configuration> sample_initial_design(const SearchSpace& space, std::size_t n,
                                                 std::uint64_t seed) {
  Encoder enc(space);
  Rng rng = make_rng(seed);

  const std::size_t d = enc.quant_dims();
  const std::size_t nq = enc.nested_quant_dims();
  Eigen::MatrixXd u = latin_hypercube(n, d + nq, rng);

  // Cycle combos through a random permutation so every combo receives
  // floor(n/L) or ceil(n/L) points.
  const std::size_t L = enc.combo_count();
  std::vector<std::size_t> perm(L);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Configuration> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EncodedPoint p;
    p.quant = u.row(static_cast<Eigen::Index>(i)).head(static_cast<Eigen::Index>(d)).transpose();
    p.combo = static_cast<int>(perm[i % L]);
    p.nested_quant = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nq), kInactivePlaceholder);
    for (int slot : enc.active_slots(p.combo))
      p.nested_quant[slot] = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d + static_cast<std::size_t>(slot)));
    out.push_back(enc.decode(p));
  }
  return out;
}

Configuration random_configuration(const Encoder& enc, Rng& rng) {
  EncodedPoint p;
  p.quant.resize(static_cast<Eigen::Index>(enc.quant_dims()));
  for (Eigen::Index i = 0; i < p.quant.size(); ++i) p.quant[i] = uniform01(rng);
  p.combo = static_cast<int>(
      std::uniform_int_distribution<std::size_t>(0, enc.combo_count() - 1)(rng));
  p.nested_quant = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(enc.nested_quant_dims()), kInactivePlaceholder);
  for (int slot : enc.active_slots(p.combo)) p.nested_quant[slot] = uniform01(rng);
  return enc.decode(p);
}

Configuration random_configuration(const SearchSpace& space, Rng& rng) {
  return random_configuration(Encoder(space), rng);
}

}  // namespace bnopt
