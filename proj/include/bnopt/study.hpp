#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnopt/acquisition.hpp"
#include "bnopt/gp.hpp"
#include "bnopt/search_space.hpp"

namespace bnopt {

/// Serializable reference to an objective; builtin names resolve in the
/// benchmark module, external objectives are driven through suggest/tell.
struct ObjectiveSpec {
  enum class Kind { builtin, external };
  Kind kind = Kind::external;
  std::string name;       // builtin only
  double noise_sd = 0.0;  // builtin only
};

/// A resolved objective. `eval` adds seeded observation noise; `truth` is the
/// noise-free surface when one exists (used for benchmark reporting).
struct Objective {
  ObjectiveSpec spec;
  std::function<double(const Configuration&, std::uint64_t)> eval;
  std::function<double(const Configuration&)> truth;
};

struct Observation {
  Configuration config;
  double y = 0.0;  // NaN when the evaluation failed
  int iteration = 0;
  std::string source;  // init | ei | epsilon_random | random_fallback
  bool ok = true;
};

enum class RunMode { sequential, batch };

struct StudyOptions {
  FitOptions fit;
  AcqOptions acq;
  double max_nugget = 1e-2;  // ceiling for per-step nugget escalation
};

/// One not-yet-evaluated configuration of the current generation.
struct PendingItem {
  std::string token;
  Configuration config;
  std::string source;
  std::optional<double> result;
};

/// Ask-tell protocol misuse (unknown token, double tell).
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full optimization history plus everything needed to continue it:
/// reloading a serialized state and resuming reproduces an uninterrupted run
/// bit for bit.
struct StudyState {
  static constexpr int schema_version = 1;

  SearchSpace space;
  ObjectiveSpec objective;
  StudyOptions options;
  RunMode mode = RunMode::sequential;
  int batch_size = 1;
  int n_init = 10;
  int n_adaptive = 50;
  std::uint64_t seed = 0;
  std::uint64_t event_counter = 0;

  std::vector<Observation> observations;
  std::vector<double> best_so_far;  // one entry per observation; NaN before first success
  std::vector<PendingItem> pending;
  int generation = 0;  // generations issued so far (0 = nothing yet; 1 = initial design)

  std::optional<KernelParams> last_params;  // warm start for the next refit
  double last_noise_ratio = 1e-6;
};

class Study {
 public:
  /// Fresh study. When an objective callback is supplied the initial design
  /// is evaluated immediately; otherwise it is queued for ask-tell.
  static Study init(SearchSpace space, ObjectiveSpec ospec, StudyOptions options, RunMode mode,
                    int batch_size, int n_init, int n_adaptive, std::uint64_t seed,
                    const Objective* objective = nullptr);

  /// Continue from a deserialized state.
  static Study resume(StudyState state);

  const StudyState& state() const { return st_; }

  /// Pending configurations of the current generation, creating the next
  /// generation when none is outstanding. Empty once the adaptive budget is
  /// exhausted.
  const std::vector<PendingItem>& suggest();

  /// Bind a result to a token (NaN marks a failed evaluation). Completing
  /// the generation commits it; tells within a generation may arrive in any
  /// order without affecting the committed order.
  void tell(const std::string& token, double y);

  /// Evaluate-and-commit one generation with a local objective. Returns
  /// false once the adaptive budget is exhausted.
  bool step(const Objective& objective);

  /// Run to budget completion (initial design plus n_adaptive evaluations).
  void run(const Objective& objective);

  /// Best successful observation (ties resolve to the earliest); throws
  /// std::runtime_error when no successful observation exists.
  std::pair<Observation, std::size_t> recommend() const;

  int adaptive_evaluations() const;
  bool budget_exhausted() const;

 private:
  explicit Study(StudyState st) : st_(std::move(st)) {}

  std::uint64_t next_event();
  void create_generation();
  void commit_generation();
  void step_pending(const Objective& objective);
  double current_y_max(const TrainedGP* gp) const;

  StudyState st_;
};

}  // namespace bnopt
