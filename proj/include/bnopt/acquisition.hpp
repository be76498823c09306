#pragma once

#include <cstdint>
#include <vector>

#include "bnopt/gp.hpp"

namespace bnopt {

enum class FantasyRule { believer, constant_liar_max };
enum class YmaxMode { observed, plugin };

struct AcqOptions {
  double epsilon = 0.10;      // probability of a uniform random proposal
  int n_raw = 128;            // random candidates per categorical combo
  int n_refine = 4;           // local-refinement starts per combo
  int batch_size = 1;
  FantasyRule fantasy = FantasyRule::believer;
  YmaxMode ymax_mode = YmaxMode::observed;
  PatternSearchOptions refine{0.1, 0.5, 1e-3, 120};
};

enum class ProposalSource { ei, epsilon_random };

struct Proposal {
  Configuration config;
  double acq_value = 0.0;
  ProposalSource source = ProposalSource::ei;
  int fantasy_step = 0;  // position within a batch; 0 for sequential proposals
};

/// Closed-form expected improvement of N(mean, var) over y_max; exact
/// max(mean - y_max, 0) when var = 0, clamped at 0 against round-off.
double expected_improvement(double mean, double var, double y_max);

/// EI at an encoded point under the fitted model.
double ei_at(const TrainedGP& gp, const EncodedPoint& x, double y_max);

/// Exhaustive-over-combos EI maximization: per categorical combo, score n_raw
/// Latin-hypercube candidates over the active quantitative coordinates, then
/// refine the best n_refine by pattern search. Deterministic given seed; the
/// reduction prefers higher EI, then lower combo index, then lower candidate
/// index.
Proposal maximize_ei(const TrainedGP& gp, double y_max, const AcqOptions& opts,
                     std::uint64_t seed);

/// Epsilon-greedy proposal: with probability epsilon a uniformly random valid
/// configuration, otherwise maximize_ei. The Bernoulli draw consumes the
/// seeded stream first so runs replay exactly.
Proposal propose(const TrainedGP& gp, double y_max, const AcqOptions& opts, std::uint64_t seed);

/// Batch proposal by fantasization: propose, imagine the outcome (believer:
/// posterior mean; constant liar: current y_max), refactorize a private copy
/// with the imagined observation appended, repeat. Members are pairwise
/// distinct configurations; the caller's model is never mutated.
std::vector<Proposal> propose_batch(const TrainedGP& gp, double y_max, const AcqOptions& opts,
                                    std::uint64_t seed);

}  // namespace bnopt
