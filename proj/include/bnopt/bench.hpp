#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bnopt/objectives.hpp"
#include "bnopt/study.hpp"

namespace bnopt {

struct BenchMethod {
  enum class Kind { bn_sequential, bn_batch, random_search };
  Kind kind = Kind::bn_sequential;
  int batch_size = 5;  // bn_batch only

  std::string tag() const;
  static BenchMethod parse(const std::string& tag);  // "bn_batch:5" etc.
};

struct BenchTrace {
  std::string method;
  int replicate = 0;
  std::vector<double> best_observed;  // running max of noisy responses
  std::vector<double> best_true;      // noise-free value at the incumbent
  std::string recommended_combo;      // categorical part of the final incumbent
  double final_observed = 0.0;
  double final_true = 0.0;
};

struct MethodSummary {
  std::string method;
  double mean_final_best = 0.0;
  double median_final_best = 0.0;
  double q25_final_best = 0.0;
  double q75_final_best = 0.0;
  double mean_final_true = 0.0;
  double median_final_true = 0.0;
  std::map<std::string, int> recommended_combos;
};

struct BenchReport {
  std::vector<BenchTrace> traces;
  std::vector<MethodSummary> summaries;
};

/// Run `replicates` independent studies of one method against a builtin-style
/// objective. Replicate r of every method derives its seed from
/// mix_seed(seed, r), so methods share initial designs and comparisons pair
/// up across replicates.
BenchReport run_benchmark(const BenchMethod& method, const Objective& objective,
                          const SearchSpace& space, int n_init, int n_adaptive, int replicates,
                          std::uint64_t seed, const StudyOptions& options = {});

/// Concatenate reports (methods run under the same seeds).
BenchReport merge_reports(std::vector<BenchReport> reports);

/// CSV trace emit (columns: method, replicate, eval_index, best_observed,
/// best_true).
void write_bench_csv(std::ostream& os, const BenchReport& report);
/// JSON summary (per-method final stats and recommended-combo counts).
std::string bench_summary_json(const BenchReport& report);

}  // namespace bnopt
