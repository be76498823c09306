#include "bnopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnopt/design.hpp"

namespace bnopt {

namespace {

struct Factorization {
  Eigen::MatrixXd chol;  // lower
  double log_det = 0.0;
};

Factorization factorize(const Encoder& enc, const Dataset& data, const KernelParams& params,
                        double noise_ratio, double nugget) {
  Eigen::MatrixXd K = gram_matrix(enc, data.points, params, nugget);
  K.diagonal().array() += noise_ratio;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw FitError("correlation matrix is not positive definite", nugget);
  Factorization f;
  f.chol = llt.matrixL();
  f.log_det = 2.0 * f.chol.diagonal().array().log().sum();
  return f;
}

struct Gls {
  double beta = 0.0;
  double quad = 0.0;  // (y - beta 1)^T K^{-1} (y - beta 1)
};

Gls gls_constant_mean(const Eigen::MatrixXd& chol, const Eigen::VectorXd& y) {
  const auto n = y.size();
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd ly = chol.triangularView<Eigen::Lower>().solve(y);
  Eigen::VectorXd l1 = chol.triangularView<Eigen::Lower>().solve(ones);
  Gls g;
  g.beta = l1.dot(ly) / l1.squaredNorm();
  g.quad = std::max(0.0, (ly - g.beta * l1).squaredNorm());
  return g;
}

constexpr double kSigma2Floor = 1e-15;

}  // namespace

ProfileEstimates profile_estimates(const Encoder& enc, const Dataset& data,
                                   const KernelParams& params, double noise_ratio, double nugget) {
  const auto n = static_cast<double>(data.size());
  Factorization f = factorize(enc, data, params, noise_ratio, nugget);
  Gls g = gls_constant_mean(f.chol, data.y);
  ProfileEstimates est;
  est.beta_hat = g.beta;
  est.sigma2_mle = g.quad / n;
  est.neg_log_likelihood =
      0.5 * n * std::log(std::max(est.sigma2_mle, kSigma2Floor)) + 0.5 * f.log_det;
  return est;
}

TrainedGP TrainedGP::from_estimates(Encoder enc, Dataset data, KernelParams params,
                                    double beta_hat, double sigma2_hat, double noise_ratio,
                                    double nugget, VarianceForm variance_form) {
  TrainedGP gp;
  gp.enc_ = std::move(enc);
  gp.data_ = std::move(data);
  gp.params_ = std::move(params);
  gp.beta_hat_ = beta_hat;
  gp.sigma2_hat_ = sigma2_hat;
  gp.noise_ratio_ = noise_ratio;
  gp.nugget_ = nugget;
  gp.variance_form_ = variance_form;

  const auto n = static_cast<Eigen::Index>(gp.data_.size());
  if (n == 0) return gp;  // pure prior

  Factorization f = factorize(gp.enc_, gp.data_, gp.params_, noise_ratio, nugget);
  gp.chol_ = std::move(f.chol);
  Eigen::VectorXd resid = gp.data_.y.array() - beta_hat;
  gp.alpha_ = gp.chol_.triangularView<Eigen::Lower>().solve(resid);
  gp.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(gp.alpha_);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  gp.kinv_one_ = gp.chol_.triangularView<Eigen::Lower>().solve(ones);
  gp.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(gp.kinv_one_);
  gp.one_kinv_one_ = gp.kinv_one_.sum();

  gp.sigma2_mle_ = std::max(0.0, resid.dot(gp.alpha_)) / static_cast<double>(n);
  gp.nll_ = 0.5 * static_cast<double>(n) * std::log(std::max(gp.sigma2_mle_, kSigma2Floor)) +
            0.5 * 2.0 * gp.chol_.diagonal().array().log().sum();
  return gp;
}

Posterior TrainedGP::posterior(const EncodedPoint& x) const {
  Posterior p;
  if (data_.size() == 0) {
    p.mean = beta_hat_;
    p.var = sigma2_hat_;
    return p;
  }
  Eigen::VectorXd r = correlation_vector(enc_, data_.points, x, params_);
  p.mean = beta_hat_ + r.dot(alpha_);
  Eigen::VectorXd lr = chol_.triangularView<Eigen::Lower>().solve(r);
  double reduction = lr.squaredNorm();
  double v = 1.0 - reduction;
  if (variance_form_ == VarianceForm::three_term) {
    double dm0 = 1.0 - r.dot(kinv_one_);
    v += dm0 * dm0 / one_kinv_one_;
  }
  p.var = std::max(0.0, sigma2_hat_ * v);
  return p;
}

namespace {

// Log-space layout of the free fit parameters.
struct ParamLayout {
  Eigen::Index d = 0, q = 0, m = 0;
  bool learn_noise = false;
  Eigen::Index dims() const { return d + q + m + (learn_noise ? 1 : 0); }
};

KernelParams decode_params(const Eigen::VectorXd& x, const ParamLayout& lay,
                           const SearchSpace& space, MaternNu nu, ValidityRule rule,
                           double* noise_ratio) {
  KernelParams p;
  p.nu = nu;
  p.theta = x.head(lay.d).array().exp();
  p.gamma = x.segment(lay.d, lay.q).array().exp();
  p.phi.resize(lay.m);
  for (Eigen::Index j = 0; j < lay.m; ++j) {
    const auto& var = space.nested()[static_cast<std::size_t>(j)];
    double gamma_k = p.gamma[space.branch_index(var.parent)];
    double cap = phi_validity_cap(gamma_k, var, rule);
    p.phi[j] = std::min(std::exp(x[lay.d + lay.q + j]), cap);
  }
  if (lay.learn_noise)
    *noise_ratio = std::exp(x[lay.dims() - 1]);
  return p;
}

}  // namespace

TrainedGP fit(const Encoder& enc, const Dataset& data, const FitOptions& opts, std::uint64_t seed,
              const KernelParams* warm_start, double warm_noise_ratio) {
  if (data.size() < 2) throw std::invalid_argument("fit: need at least 2 observations");
  if (data.points.size() != static_cast<std::size_t>(data.y.size()))
    throw std::invalid_argument("fit: points/responses length mismatch");

  const SearchSpace& space = enc.space();
  ParamLayout lay;
  lay.d = static_cast<Eigen::Index>(space.quant().size());
  lay.q = static_cast<Eigen::Index>(space.branch().size());
  lay.m = static_cast<Eigen::Index>(space.nested().size());
  lay.learn_noise = opts.learn_noise;

  Eigen::VectorXd lower(lay.dims()), upper(lay.dims());
  for (Eigen::Index i = 0; i < lay.d; ++i) {
    lower[i] = std::log(opts.theta_bounds.first);
    upper[i] = std::log(opts.theta_bounds.second);
  }
  for (Eigen::Index k = 0; k < lay.q; ++k) {
    lower[lay.d + k] = std::log(opts.gamma_bounds.first);
    upper[lay.d + k] = std::log(opts.gamma_bounds.second);
  }
  for (Eigen::Index j = 0; j < lay.m; ++j) {
    lower[lay.d + lay.q + j] = std::log(opts.phi_bounds.first);
    upper[lay.d + lay.q + j] = std::log(opts.phi_bounds.second);
  }
  if (lay.learn_noise) {
    lower[lay.dims() - 1] = std::log(opts.noise_bounds.first);
    upper[lay.dims() - 1] = std::log(opts.noise_bounds.second);
  }

  double last_nugget = opts.nugget;
  auto objective = [&](const Eigen::VectorXd& x) -> double {
    double noise_ratio = 0.0;
    KernelParams p = decode_params(x, lay, space, opts.matern_nu, opts.validity, &noise_ratio);
    try {
      return profile_estimates(enc, data, p, noise_ratio, opts.nugget).neg_log_likelihood;
    } catch (const FitError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Eigen::VectorXd> starts;
  if (warm_start != nullptr) {
    Eigen::VectorXd x0(lay.dims());
    x0.head(lay.d) = warm_start->theta.array().log();
    x0.segment(lay.d, lay.q) = warm_start->gamma.array().log();
    x0.segment(lay.d + lay.q, lay.m) = warm_start->phi.array().log();
    if (lay.learn_noise)
      x0[lay.dims() - 1] = std::log(std::max(warm_noise_ratio, opts.noise_bounds.first));
    for (Eigen::Index i = 0; i < lay.dims(); ++i) x0[i] = std::clamp(x0[i], lower[i], upper[i]);
    starts.push_back(std::move(x0));
  }
  {
    Rng rng = make_rng(seed);
    Eigen::MatrixXd u = latin_hypercube(static_cast<std::size_t>(std::max(1, opts.restarts)),
                                        static_cast<std::size_t>(lay.dims()), rng);
    for (Eigen::Index s = 0; s < u.rows(); ++s)
      starts.push_back(lower + (u.row(s).transpose().array() * (upper - lower).array()).matrix());
  }

  bool have_best = false;
  PatternSearchResult best;
  for (const auto& x0 : starts) {
    PatternSearchResult r = pattern_search_minimize(objective, x0, lower, upper, opts.search);
    if (!std::isfinite(r.value)) continue;
    if (!have_best || r.value < best.value) {
      best = r;
      have_best = true;
    }
  }
  if (!have_best)
    throw FitError("fit: every start failed factorization (nugget=" + std::to_string(last_nugget) +
                       ", n=" + std::to_string(data.size()) + ")",
                   last_nugget);

  double noise_ratio = 0.0;
  KernelParams params =
      decode_params(best.x, lay, space, opts.matern_nu, opts.validity, &noise_ratio);
  ProfileEstimates est = profile_estimates(enc, data, params, noise_ratio, opts.nugget);
  double sigma2 = opts.sigma2_mode == Sigma2Mode::mle
                      ? est.sigma2_mle
                      : est.sigma2_mle * static_cast<double>(data.size());
  return TrainedGP::from_estimates(enc, data, std::move(params), est.beta_hat, sigma2, noise_ratio,
                                   opts.nugget, opts.variance_form);
}

}  // namespace bnopt
