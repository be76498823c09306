#include "bnopt/kernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bnopt {

double matern_profile(double r, MaternNu nu) {
  switch (nu) {
    case MaternNu::half:
      return std::exp(-r);
    case MaternNu::three_halves: {
      const double t = std::sqrt(3.0) * r;
      return (1.0 + t) * std::exp(-t);
    }
    case MaternNu::five_halves: {
      const double t = std::sqrt(5.0) * r;
      return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  return 0.0;  // unreachable
}

double k_quant(std::span<const double> w, std::span<const double> w2,
               const Eigen::VectorXd& theta, MaternNu nu) {
  if (w.size() != w2.size() || static_cast<Eigen::Index>(w.size()) != theta.size())
    throw std::invalid_argument("k_quant: dimension mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    r += theta[static_cast<Eigen::Index>(i)] * std::abs(w[i] - w2[i]);
  return matern_profile(r, nu);
}

double k_branch(std::span<const int> z, std::span<const int> z2, const Eigen::VectorXd& gamma) {
  if (z.size() != z2.size() || static_cast<Eigen::Index>(z.size()) != gamma.size())
    throw std::invalid_argument("k_branch: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k)
    if (z[k] != z2[k]) s += gamma[static_cast<Eigen::Index>(k)];
  return std::exp(-s);
}

double k_nested(const Encoder& enc, const EncodedPoint& a, const EncodedPoint& b,
                const Eigen::VectorXd& phi) {
  const SearchSpace& space = enc.space();
  const ComboAssignment& ca = enc.combos()[static_cast<std::size_t>(a.combo)];
  const ComboAssignment& cb = enc.combos()[static_cast<std::size_t>(b.combo)];

  double s = 0.0;
  for (std::size_t k = 0; k < space.branch().size(); ++k) {
    if (ca.branch_level[k] != cb.branch_level[k]) continue;  // no common level, factor 1
    for (int j : space.nested_under(static_cast<int>(k), ca.branch_level[k])) {
      const auto ju = static_cast<std::size_t>(j);
      const auto& var = space.nested()[ju];
      if (var.kind == NestedKind::qualitative) {
        if (ca.nested_level[ju] != cb.nested_level[ju]) s += phi[j];
      } else {
        int slot = enc.nested_quant_slot(j);
        s += phi[j] * std::abs(a.nested_quant[slot] - b.nested_quant[slot]);
      }
    }
  }
  return std::exp(-s);
}

double k_full(const Encoder& enc, const EncodedPoint& a, const EncodedPoint& b,
              const KernelParams& params) {
  const ComboAssignment& ca = enc.combos()[static_cast<std::size_t>(a.combo)];
  const ComboAssignment& cb = enc.combos()[static_cast<std::size_t>(b.combo)];
  double kq = k_quant({a.quant.data(), static_cast<std::size_t>(a.quant.size())},
                      {b.quant.data(), static_cast<std::size_t>(b.quant.size())}, params.theta,
                      params.nu);
  double kb = k_branch({ca.branch_level.data(), ca.branch_level.size()},
                       {cb.branch_level.data(), cb.branch_level.size()}, params.gamma);
  double kn = k_nested(enc, a, b, params.phi);
  return kq * kb * kn;
}

std::vector<ValidityViolation> check_validity(const KernelParams& params,
                                              const SearchSpace& space) {
  std::vector<ValidityViolation> out;
  constexpr double slack = 1e-12;
  for (std::size_t j = 0; j < space.nested().size(); ++j) {
    const auto& var = space.nested()[j];
    int k = space.branch_index(var.parent);
    double gamma_k = params.gamma[k];
    double phi_j = params.phi[static_cast<Eigen::Index>(j)];
    if (!(phi_j > 0.0) || !std::isfinite(phi_j)) {
      out.push_back({var.parent, var.parent_level, var.name, "phi must be positive and finite"});
      continue;
    }
    if (var.kind == NestedKind::qualitative) {
      const double g = static_cast<double>(var.levels.size());
      double lhs = std::exp(-phi_j) + (1.0 - std::exp(-phi_j)) / g;
      double rhs = std::exp(-gamma_k);
      if (lhs < rhs - slack)
        out.push_back({var.parent, var.parent_level, var.name,
                       "exp(-phi) + (1-exp(-phi))/g = " + std::to_string(lhs) + " < exp(-gamma) = " +
                           std::to_string(rhs)});
    } else {
      if (phi_j > gamma_k + slack)
        out.push_back({var.parent, var.parent_level, var.name,
                       "phi = " + std::to_string(phi_j) + " > gamma = " + std::to_string(gamma_k)});
    }
  }
  return out;
}

double phi_validity_cap(double gamma_k, const NestedVarSpec& var, ValidityRule rule) {
  if (rule == ValidityRule::remark1 || var.kind == NestedKind::quantitative) return gamma_k;
  const double g = static_cast<double>(var.levels.size());
  const double eg = std::exp(-gamma_k);
  if (eg <= 1.0 / g) return std::numeric_limits<double>::infinity();
  return -std::log((g * eg - 1.0) / (g - 1.0));
}

Eigen::MatrixXd gram_matrix(const Encoder& enc, const std::vector<EncodedPoint>& points,
                            const KernelParams& params, double nugget) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0 + nugget;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = k_full(enc, points[static_cast<std::size_t>(i)],
                        points[static_cast<std::size_t>(j)], params);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::VectorXd correlation_vector(const Encoder& enc, const std::vector<EncodedPoint>& points,
                                   const EncodedPoint& x, const KernelParams& params) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = k_full(enc, x, points[i], params);
  return r;
}

}  // namespace bnopt
