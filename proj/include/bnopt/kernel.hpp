#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bnopt/encoding.hpp"

namespace bnopt {

enum class MaternNu { half, three_halves, five_halves };

/// Correlation hyperparameters of the product kernel: one theta per shared
/// quantitative dimension, one gamma per branch variable, one phi per
/// declared nested variable (each nested variable is tied to a single
/// (branch, level) slot).
struct KernelParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd phi;
  MaternNu nu = MaternNu::five_halves;
};

/// Standard Matern profile at weighted l1 distance r >= 0; profile(0) = 1.
double matern_profile(double r, MaternNu nu);

/// Quantitative factor: Matern correlation at r = sum_i theta_i |w_i - w'_i|.
/// Throws on dimension mismatch.
double k_quant(std::span<const double> w, std::span<const double> w2,
               const Eigen::VectorXd& theta, MaternNu nu);

/// Branching factor: prod_k exp(-gamma_k 1{z_k != z'_k}) over level indices.
double k_branch(std::span<const int> z, std::span<const int> z2, const Eigen::VectorXd& gamma);

/// Nested factor from Definition-style indicators: a nested variable
/// contributes only when both points share its parent level; distance is
/// |v - v'| for quantitative and a mismatch indicator for qualitative
/// variables. Equals 1 whenever the parent levels differ.
double k_nested(const Encoder& enc, const EncodedPoint& a, const EncodedPoint& b,
                const Eigen::VectorXd& phi);

/// Product kernel over all three variable types; k_full(x, x) = 1.
double k_full(const Encoder& enc, const EncodedPoint& a, const EncodedPoint& b,
              const KernelParams& params);

struct ValidityViolation {
  std::string branch;   // branch variable name (k)
  std::string level;    // level label (b)
  std::string nested;   // nested variable name (j)
  std::string message;
};

/// Sufficient-condition check for positive definiteness: qualitative nested
/// variables must satisfy exp(-phi) + (1 - exp(-phi))/g >= exp(-gamma_k);
/// quantitative nested variables the box form phi <= gamma_k. Returns every
/// violated (branch, level, nested) triple.
std::vector<ValidityViolation> check_validity(const KernelParams& params, const SearchSpace& space);

enum class ValidityRule { remark1, theorem1 };

/// Largest phi keeping the kernel valid for a nested variable under a branch
/// with correlation parameter gamma_k. Under remark1 the cap is gamma_k for
/// every kind; under theorem1 a qualitative variable with g levels may go up
/// to -log((g e^{-gamma} - 1)/(g - 1)), unbounded once e^{-gamma} <= 1/g.
double phi_validity_cap(double gamma_k, const NestedVarSpec& var, ValidityRule rule);

/// K[i][j] = k_full(x_i, x_j) + nugget 1{i=j}; symmetric by construction.
Eigen::MatrixXd gram_matrix(const Encoder& enc, const std::vector<EncodedPoint>& points,
                            const KernelParams& params, double nugget);

/// Correlation vector (k(x, x_1), ..., k(x, x_n)).
Eigen::VectorXd correlation_vector(const Encoder& enc, const std::vector<EncodedPoint>& points,
                                   const EncodedPoint& x, const KernelParams& params);

}  // namespace bnopt
