#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bnopt/encoding.hpp"
#include "bnopt/kernel.hpp"
#include "bnopt/pattern_search.hpp"

namespace bnopt {

struct Dataset {
  std::vector<EncodedPoint> points;
  Eigen::VectorXd y;

  std::size_t size() const { return points.size(); }
};

enum class Sigma2Mode { mle, conservative };
enum class VarianceForm { two_term, three_term };

struct FitOptions {
  std::pair<double, double> theta_bounds{1e-3, 1e3};
  std::pair<double, double> gamma_bounds{1e-3, 10.0};
  std::pair<double, double> phi_bounds{1e-3, 10.0};
  std::pair<double, double> noise_bounds{1e-10, 10.0};  // noise-to-signal ratio
  int restarts = 10;
  bool learn_noise = true;
  Sigma2Mode sigma2_mode = Sigma2Mode::mle;
  VarianceForm variance_form = VarianceForm::two_term;
  ValidityRule validity = ValidityRule::remark1;
  MaternNu matern_nu = MaternNu::five_halves;
  double nugget = 1e-8;
  PatternSearchOptions search{0.6, 0.5, 5e-3, 300};
};

struct FitError : std::runtime_error {
  FitError(const std::string& msg, double nugget_level)
      : std::runtime_error(msg), nugget(nugget_level) {}
  double nugget;
};

struct ProfileEstimates {
  double beta_hat = 0.0;
  double sigma2_mle = 0.0;          // (1/n) residual quadratic form
  double neg_log_likelihood = 0.0;  // (n/2) log sigma2 + (1/2) log|K|
};

/// Constant-mean generalized least squares through the correlation model
/// K = R + (noise_ratio + nugget) I. noise_ratio is the observation noise
/// variance expressed relative to the process variance. Throws FitError when
/// K cannot be factorized.
ProfileEstimates profile_estimates(const Encoder& enc, const Dataset& data,
                                   const KernelParams& params, double noise_ratio, double nugget);

struct Posterior {
  double mean = 0.0;
  double var = 0.0;
};

/// Immutable fitted model; safe for concurrent posterior queries.
class TrainedGP {
 public:
  /// Factorize a model from explicit estimates (used by fit, fantasy updates
  /// in batch proposals, and deserialization). Throws FitError if the Gram
  /// matrix does not factorize.
  static TrainedGP from_estimates(Encoder enc, Dataset data, KernelParams params,
                                  double beta_hat, double sigma2_hat, double noise_ratio,
                                  double nugget, VarianceForm variance_form);

  Posterior posterior(const EncodedPoint& x) const;
  Posterior posterior(const Configuration& cfg) const { return posterior(enc_.encode(cfg)); }

  const Encoder& encoder() const { return enc_; }
  const Dataset& data() const { return data_; }
  const KernelParams& params() const { return params_; }
  double beta_hat() const { return beta_hat_; }
  double sigma2_hat() const { return sigma2_hat_; }
  double noise_ratio() const { return noise_ratio_; }
  /// Absolute noise variance, noise_ratio * sigma2 (MLE scale).
  double noise_var() const { return noise_ratio_ * sigma2_mle_; }
  double sigma2_mle() const { return sigma2_mle_; }
  double nugget() const { return nugget_; }
  double neg_log_likelihood() const { return nll_; }
  VarianceForm variance_form() const { return variance_form_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_; }

 private:
  TrainedGP() = default;

  Encoder enc_{SearchSpace{}};
  Dataset data_;
  KernelParams params_;
  double beta_hat_ = 0.0;
  double sigma2_hat_ = 0.0;   // value used in the posterior variance
  double sigma2_mle_ = 0.0;   // (1/n) quadratic form, kept for reporting
  double noise_ratio_ = 0.0;
  double nugget_ = 0.0;
  double nll_ = 0.0;
  VarianceForm variance_form_ = VarianceForm::two_term;

  Eigen::MatrixXd chol_;      // lower factor of K
  Eigen::VectorXd alpha_;     // K^{-1} (y - beta 1)
  Eigen::VectorXd kinv_one_;  // K^{-1} 1
  double one_kinv_one_ = 0.0;

  friend TrainedGP fit(const Encoder&, const Dataset&, const FitOptions&, std::uint64_t,
                       const KernelParams*, double);
};

/// Constrained maximum-likelihood fit: multi-start pattern search over the
/// log-parameters inside the box bounds, with phi mapped into the validity
/// region (remark1 cap phi <= gamma, or the wider theorem1 cap for
/// qualitative nested variables). Deterministic given seed; ties between
/// starts break toward the lower start index. An optional warm start is
/// searched before the seeded restarts.
///
/// Categorical combos with no observations are allowed; predictions there
/// revert toward the prior mean.
TrainedGP fit(const Encoder& enc, const Dataset& data, const FitOptions& opts, std::uint64_t seed,
              const KernelParams* warm_start = nullptr, double warm_noise_ratio = 1e-6);

}  // namespace bnopt
