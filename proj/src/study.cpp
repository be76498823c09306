#include "bnopt/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bnopt/design.hpp"

namespace bnopt {

namespace {

std::string source_name(ProposalSource s) {
  return s == ProposalSource::ei ? "ei" : "epsilon_random";
}

std::string make_token(std::uint64_t seed, int generation, int index) {
  char buf[48];
  auto tag = static_cast<unsigned>(mix_seed(seed, (static_cast<std::uint64_t>(generation) << 20) ^
                                                      static_cast<std::uint64_t>(index)) &
                                   0xffffffffu);
  std::snprintf(buf, sizeof(buf), "t%d-%d-%08x", generation, index, tag);
  return buf;
}

}  // namespace

Study Study::init(SearchSpace space, ObjectiveSpec ospec, StudyOptions options, RunMode mode,
                  int batch_size, int n_init, int n_adaptive, std::uint64_t seed,
                  const Objective* objective) {
  if (n_init < 2) throw std::invalid_argument("study: n_init must be >= 2");
  if (mode == RunMode::batch && batch_size < 1)
    throw std::invalid_argument("study: batch size must be >= 1");

  StudyState st;
  st.space = std::move(space);
  st.objective = std::move(ospec);
  st.options = std::move(options);
  st.mode = mode;
  st.batch_size = mode == RunMode::batch ? batch_size : 1;
  st.n_init = n_init;
  st.n_adaptive = n_adaptive;
  st.seed = seed;

  Study study(std::move(st));
  study.suggest();
  if (objective != nullptr) study.step_pending(*objective);
  return study;
}

Study Study::resume(StudyState state) { return Study(std::move(state)); }

std::uint64_t Study::next_event() { return mix_seed(st_.seed, st_.event_counter++); }

int Study::adaptive_evaluations() const {
  int n = 0;
  for (const auto& o : st_.observations)
    if (o.iteration > 0) ++n;
  return n;
}

bool Study::budget_exhausted() const {
  return st_.generation >= 1 && st_.pending.empty() && adaptive_evaluations() >= st_.n_adaptive;
}

double Study::current_y_max(const TrainedGP* gp) const {
  double y_max = -std::numeric_limits<double>::infinity();
  if (gp != nullptr && st_.options.acq.ymax_mode == YmaxMode::plugin) {
    for (const auto& o : st_.observations)
      if (o.ok) y_max = std::max(y_max, gp->posterior(o.config).mean);
  } else {
    for (const auto& o : st_.observations)
      if (o.ok) y_max = std::max(y_max, o.y);
  }
  return y_max;
}

void Study::create_generation() {
  if (!st_.pending.empty()) return;

  if (st_.generation == 0) {
    std::uint64_t ev = next_event();
    auto cfgs = sample_initial_design(st_.space, static_cast<std::size_t>(st_.n_init), ev);
    st_.generation = 1;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      st_.pending.push_back({make_token(st_.seed, 1, static_cast<int>(i)),
                             std::move(cfgs[i]), "init", std::nullopt});
    return;
  }

  const int remaining = st_.n_adaptive - adaptive_evaluations();
  if (remaining <= 0) return;
  const int target = st_.mode == RunMode::batch ? std::min(st_.batch_size, remaining) : 1;

  Dataset data;
  Encoder enc(st_.space);
  for (const auto& o : st_.observations) {
    if (!o.ok) continue;
    data.points.push_back(enc.encode(o.config));
    data.y.conservativeResize(data.y.size() + 1);
    data.y[data.y.size() - 1] = o.y;
  }
  if (data.size() < 2)
    throw std::runtime_error("study: need at least 2 successful observations to adapt");

  const std::uint64_t fit_seed = next_event();
  const std::uint64_t propose_seed = next_event();

  // Refit with per-step nugget escalation; give up into a random generation
  // only when even the largest nugget fails to factorize.
  std::optional<TrainedGP> gp;
  FitOptions fopts = st_.options.fit;
  std::string fail_reason;
  while (true) {
    try {
      const KernelParams* warm = st_.last_params ? &*st_.last_params : nullptr;
      gp = fit(enc, data, fopts, fit_seed, warm, st_.last_noise_ratio);
      break;
    } catch (const FitError& e) {
      fail_reason = e.what();
      double next_nugget = std::max(fopts.nugget, 1e-8) * 10.0;
      if (next_nugget > st_.options.max_nugget) break;
      fopts.nugget = next_nugget;
    }
  }

  ++st_.generation;
  std::vector<Proposal> proposals;
  if (gp) {
    st_.last_params = gp->params();
    st_.last_noise_ratio = gp->noise_ratio();
    double y_max = current_y_max(&*gp);
    AcqOptions aopts = st_.options.acq;
    aopts.batch_size = target;
    proposals = target == 1 ? std::vector<Proposal>{propose(*gp, y_max, aopts, propose_seed)}
                            : propose_batch(*gp, y_max, aopts, propose_seed);

    // Noise-free models cannot absorb exact duplicates of observed points;
    // redraw such a proposal once.
    if (!st_.options.fit.learn_noise) {
      Rng redraw = make_rng(propose_seed, 0xD1);
      for (auto& p : proposals) {
        bool dup = std::any_of(st_.observations.begin(), st_.observations.end(),
                               [&](const Observation& o) { return o.ok && o.config == p.config; });
        if (dup) {
          p.config = random_configuration(enc, redraw);
          p.source = ProposalSource::epsilon_random;
          p.acq_value = 0.0;
        }
      }
    }
    for (std::size_t i = 0; i < proposals.size(); ++i)
      st_.pending.push_back({make_token(st_.seed, st_.generation, static_cast<int>(i)),
                             proposals[i].config, source_name(proposals[i].source), std::nullopt});
  } else {
    Rng rng = make_rng(propose_seed);
    for (int i = 0; i < target; ++i)
      st_.pending.push_back({make_token(st_.seed, st_.generation, i),
                             random_configuration(enc, rng), "random_fallback", std::nullopt});
  }
}

const std::vector<PendingItem>& Study::suggest() {
  create_generation();
  return st_.pending;
}

void Study::tell(const std::string& token, double y) {
  auto it = std::find_if(st_.pending.begin(), st_.pending.end(),
                         [&](const PendingItem& p) { return p.token == token; });
  if (it == st_.pending.end()) throw ProtocolError("unknown token '" + token + "'");
  if (it->result.has_value()) throw ProtocolError("token '" + token + "' already told");
  it->result = y;
  bool complete = std::all_of(st_.pending.begin(), st_.pending.end(),
                              [](const PendingItem& p) { return p.result.has_value(); });
  if (complete) commit_generation();
}

void Study::commit_generation() {
  const int iteration = st_.generation - 1;  // initial design is iteration 0
  for (auto& p : st_.pending) {
    Observation o;
    o.config = std::move(p.config);
    o.y = *p.result;
    o.iteration = iteration;
    o.source = std::move(p.source);
    o.ok = std::isfinite(o.y);
    double prev = st_.best_so_far.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : st_.best_so_far.back();
    double best = prev;
    if (o.ok && (!std::isfinite(prev) || o.y > prev)) best = o.y;
    st_.best_so_far.push_back(best);
    st_.observations.push_back(std::move(o));
  }
  st_.pending.clear();
}

bool Study::step(const Objective& objective) {
  if (budget_exhausted()) return false;
  suggest();
  if (st_.pending.empty()) return false;
  step_pending(objective);
  return true;
}

void Study::step_pending(const Objective& objective) {
  if (!objective.eval) throw std::invalid_argument("study: objective is not evaluable");
  // Tokens are resolved in generation order; each evaluation draws a fresh
  // noise event so traces replay across save/reload boundaries.
  std::vector<std::pair<std::string, Configuration>> items;
  items.reserve(st_.pending.size());
  for (const auto& p : st_.pending) items.emplace_back(p.token, p.config);
  for (const auto& [token, cfg] : items) {
    double y;
    try {
      y = objective.eval(cfg, next_event());
    } catch (const std::exception&) {
      y = std::numeric_limits<double>::quiet_NaN();
    }
    tell(token, y);
  }
}

void Study::run(const Objective& objective) {
  while (step(objective)) {
  }
}

std::pair<Observation, std::size_t> Study::recommend() const {
  const Observation* best = nullptr;
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < st_.observations.size(); ++i) {
    const auto& o = st_.observations[i];
    if (!o.ok) continue;
    if (best == nullptr || o.y > best->y) {
      best = &o;
      best_idx = i;
    }
  }
  if (best == nullptr) throw std::runtime_error("recommend: no successful observation");
  return {*best, best_idx};
}

}  // namespace bnopt
