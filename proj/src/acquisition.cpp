#include "bnopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "bnopt/design.hpp"
#include "bnopt/stats.hpp"

namespace bnopt {

double expected_improvement(double mean, double var, double y_max) {
  const double delta = mean - y_max;
  if (var <= 0.0) return std::max(delta, 0.0);
  const double s = std::sqrt(var);
  const double z = delta / s;
  return std::max(0.0, s * norm_pdf(z) + delta * norm_cdf(z));
}

double ei_at(const TrainedGP& gp, const EncodedPoint& x, double y_max) {
  Posterior p = gp.posterior(x);
  return expected_improvement(p.mean, p.var, y_max);
}

namespace {

// Candidate coordinates for one combo: shared quantitative dims followed by
// the combo's active nested-quant slots.
struct ComboDims {
  std::vector<int> slots;  // active nested slots, in slot order
  Eigen::Index total(const Encoder& enc) const {
    return static_cast<Eigen::Index>(enc.quant_dims() + slots.size());
  }
};

EncodedPoint assemble(const Encoder& enc, int combo, const ComboDims& dims,
                      const Eigen::VectorXd& coords) {
  EncodedPoint p;
  const auto d = static_cast<Eigen::Index>(enc.quant_dims());
  p.quant = coords.head(d);
  p.combo = combo;
  p.nested_quant = Eigen::VectorXd::Constant(
      static_cast<Eigen::Index>(enc.nested_quant_dims()), kInactivePlaceholder);
  for (std::size_t t = 0; t < dims.slots.size(); ++t)
    p.nested_quant[dims.slots[t]] = coords[d + static_cast<Eigen::Index>(t)];
  return p;
}

struct ComboBest {
  double ei = -1.0;
  Eigen::VectorXd coords;
};

}  // namespace

Proposal maximize_ei(const TrainedGP& gp, double y_max, const AcqOptions& opts,
                     std::uint64_t seed) {
  const Encoder& enc = gp.encoder();
  Rng rng = make_rng(seed);

  double best_ei = -1.0;
  int best_combo = 0;
  Eigen::VectorXd best_coords;

  for (std::size_t c = 0; c < enc.combo_count(); ++c) {
    ComboDims dims{enc.active_slots(static_cast<int>(c))};
    const Eigen::Index nd = dims.total(enc);
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(nd), hi = Eigen::VectorXd::Ones(nd);

    auto neg_ei = [&](const Eigen::VectorXd& x) {
      return -ei_at(gp, assemble(enc, static_cast<int>(c), dims, x), y_max);
    };

    Eigen::MatrixXd cands = latin_hypercube(static_cast<std::size_t>(opts.n_raw),
                                            static_cast<std::size_t>(nd), rng);
    std::vector<std::pair<double, int>> scored;  // (-ei, index): stable best-first order
    scored.reserve(static_cast<std::size_t>(opts.n_raw));
    for (int i = 0; i < opts.n_raw; ++i)
      scored.emplace_back(neg_ei(cands.row(i).transpose()), i);
    std::sort(scored.begin(), scored.end());

    ComboBest combo_best;
    const int refine = std::min(opts.n_refine, opts.n_raw);
    for (int t = 0; t < refine; ++t) {
      Eigen::VectorXd x0 = cands.row(scored[static_cast<std::size_t>(t)].second).transpose();
      PatternSearchResult r = pattern_search_minimize(neg_ei, x0, lo, hi, opts.refine);
      if (-r.value > combo_best.ei) {
        combo_best.ei = -r.value;
        combo_best.coords = r.x;
      }
    }
    if (combo_best.ei > best_ei) {
      best_ei = combo_best.ei;
      best_combo = static_cast<int>(c);
      best_coords = combo_best.coords;
    }
  }

  ComboDims dims{enc.active_slots(best_combo)};
  EncodedPoint x = assemble(enc, best_combo, dims, best_coords);
  return Proposal{enc.decode(x), best_ei, ProposalSource::ei, 0};
}

Proposal propose(const TrainedGP& gp, double y_max, const AcqOptions& opts, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const double u = uniform01(rng);
  if (u < opts.epsilon) {
    Configuration cfg = random_configuration(gp.encoder(), rng);
    double ei = ei_at(gp, gp.encoder().encode(cfg), y_max);
    return Proposal{std::move(cfg), ei, ProposalSource::epsilon_random, 0};
  }
  return maximize_ei(gp, y_max, opts, mix_seed(seed, 1));
}

std::vector<Proposal> propose_batch(const TrainedGP& gp, double y_max, const AcqOptions& opts,
                                    std::uint64_t seed) {
  std::vector<Proposal> batch;
  if (opts.batch_size <= 0) return batch;

  // Private fantasy copy; the caller's model is left untouched. The running
  // incumbent absorbs fantasized outcomes so EI dies at pending locations.
  Dataset fantasy = gp.data();
  const TrainedGP* model = &gp;
  std::optional<TrainedGP> updated;
  double y_max_local = y_max;

  Rng redraw_rng = make_rng(seed, 0x9d);
  for (int b = 0; b < opts.batch_size; ++b) {
    Proposal p = propose(*model, y_max_local, opts, mix_seed(seed, static_cast<std::uint64_t>(b)));
    p.fantasy_step = b;

    auto duplicate = [&](const Proposal& cand) {
      return std::any_of(batch.begin(), batch.end(),
                         [&](const Proposal& q) { return q.config == cand.config; });
    };
    for (int tries = 0; duplicate(p) && tries < 100; ++tries) {
      p.config = random_configuration(gp.encoder(), redraw_rng);
      p.acq_value = ei_at(*model, gp.encoder().encode(p.config), y_max_local);
      p.source = ProposalSource::epsilon_random;
    }
    batch.push_back(p);
    if (b + 1 == opts.batch_size) break;

    EncodedPoint px = gp.encoder().encode(p.config);
    double imagined = opts.fantasy == FantasyRule::believer ? model->posterior(px).mean : y_max;
    y_max_local = std::max(y_max_local, imagined);
    fantasy.points.push_back(px);
    fantasy.y.conservativeResize(fantasy.y.size() + 1);
    fantasy.y[fantasy.y.size() - 1] = imagined;

    updated = TrainedGP::from_estimates(gp.encoder(), fantasy, gp.params(), gp.beta_hat(),
                                        gp.sigma2_hat(), gp.noise_ratio(), gp.nugget(),
                                        gp.variance_form());
    model = &*updated;
  }
  return batch;
}

}  // namespace bnopt
