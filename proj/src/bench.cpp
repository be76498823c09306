#include "bnopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bnopt/design.hpp"
#include "bnopt/encoding.hpp"

namespace bnopt {

std::string BenchMethod::tag() const {
  switch (kind) {
    case Kind::bn_sequential: return "bn_sequential";
    case Kind::bn_batch: return "bn_batch:" + std::to_string(batch_size);
    case Kind::random_search: return "random_search";
  }
  return "?";
}

BenchMethod BenchMethod::parse(const std::string& tag) {
  BenchMethod m;
  if (tag == "bn_sequential") {
    m.kind = Kind::bn_sequential;
  } else if (tag == "random_search") {
    m.kind = Kind::random_search;
  } else if (tag.rfind("bn_batch", 0) == 0) {
    m.kind = Kind::bn_batch;
    auto colon = tag.find(':');
    m.batch_size = colon == std::string::npos ? 5 : std::stoi(tag.substr(colon + 1));
    if (m.batch_size < 1) throw std::invalid_argument("bench: batch size must be >= 1");
  } else {
    throw std::invalid_argument("bench: unknown method '" + tag + "'");
  }
  return m;
}

namespace {

std::string combo_of_config(const SearchSpace& space, const Configuration& cfg) {
  Encoder enc(space);
  return combo_label(space, enc.combos()[static_cast<std::size_t>(enc.combo_of(cfg))]);
}

BenchTrace trace_from_observations(const std::string& method_tag, int replicate,
                                   const std::vector<Observation>& obs, const Objective& objective,
                                   const SearchSpace& space) {
  BenchTrace t;
  t.method = method_tag;
  t.replicate = replicate;
  double best = -std::numeric_limits<double>::infinity();
  const Configuration* incumbent = nullptr;
  for (const auto& o : obs) {
    if (o.ok && o.y > best) {
      best = o.y;
      incumbent = &o.config;
    }
    t.best_observed.push_back(best);
    t.best_true.push_back(incumbent != nullptr && objective.truth
                              ? objective.truth(*incumbent)
                              : std::numeric_limits<double>::quiet_NaN());
  }
  if (incumbent != nullptr) {
    t.recommended_combo = combo_of_config(space, *incumbent);
    t.final_observed = t.best_observed.back();
    t.final_true = t.best_true.back();
  }
  return t;
}

std::vector<Observation> run_random_search(const Objective& objective, const SearchSpace& space,
                                           int budget, std::uint64_t seed) {
  Encoder enc(space);
  Rng rng = make_rng(seed, 0xA11);
  std::vector<Observation> obs;
  for (int i = 0; i < budget; ++i) {
    Observation o;
    o.config = random_configuration(enc, rng);
    o.iteration = i;
    o.source = "random";
    o.y = objective.eval(o.config, mix_seed(seed, 0xE000 + static_cast<std::uint64_t>(i)));
    o.ok = std::isfinite(o.y);
    obs.push_back(std::move(o));
  }
  return obs;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  double idx = p * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(idx);
  auto hi = std::min(lo + 1, v.size() - 1);
  double w = idx - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

MethodSummary summarize(const std::string& method_tag, const std::vector<BenchTrace>& traces) {
  MethodSummary s;
  s.method = method_tag;
  std::vector<double> finals, trues;
  for (const auto& t : traces) {
    if (t.method != method_tag) continue;
    finals.push_back(t.final_observed);
    trues.push_back(t.final_true);
    s.recommended_combos[t.recommended_combo] += 1;
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : acc / static_cast<double>(v.size());
  };
  s.mean_final_best = mean(finals);
  s.median_final_best = quantile(finals, 0.5);
  s.q25_final_best = quantile(finals, 0.25);
  s.q75_final_best = quantile(finals, 0.75);
  s.mean_final_true = mean(trues);
  s.median_final_true = quantile(trues, 0.5);
  return s;
}

}  // namespace

BenchReport run_benchmark(const BenchMethod& method, const Objective& objective,
                          const SearchSpace& space, int n_init, int n_adaptive, int replicates,
                          std::uint64_t seed, const StudyOptions& options) {
  if (n_init < 1 || n_adaptive < 0 || replicates < 1)
    throw std::invalid_argument("bench: parameters must be positive");

  BenchReport report;
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t rep_seed = mix_seed(seed, static_cast<std::uint64_t>(r));
    std::vector<Observation> obs;
    if (method.kind == BenchMethod::Kind::random_search) {
      obs = run_random_search(objective, space, n_init + n_adaptive, rep_seed);
    } else {
      RunMode mode = method.kind == BenchMethod::Kind::bn_batch ? RunMode::batch
                                                                : RunMode::sequential;
      Study study = Study::init(space, objective.spec, options, mode, method.batch_size, n_init,
                                n_adaptive, rep_seed, &objective);
      study.run(objective);
      obs = study.state().observations;
    }
    report.traces.push_back(trace_from_observations(method.tag(), r, obs, objective, space));
  }
  report.summaries.push_back(summarize(method.tag(), report.traces));
  return report;
}

BenchReport merge_reports(std::vector<BenchReport> reports) {
  BenchReport merged;
  for (auto& r : reports) {
    for (auto& t : r.traces) merged.traces.push_back(std::move(t));
    for (auto& s : r.summaries) merged.summaries.push_back(std::move(s));
  }
  return merged;
}

void write_bench_csv(std::ostream& os, const BenchReport& report) {
  os << "method,replicate,eval_index,best_observed,best_true\n";
  char buf[96];
  for (const auto& t : report.traces) {
    for (std::size_t i = 0; i < t.best_observed.size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%zu,%.12g,%.12g\n", i, t.best_observed[i], t.best_true[i]);
      os << t.method << "," << t.replicate << buf;
    }
  }
}

std::string bench_summary_json(const BenchReport& report) {
  nlohmann::json j;
  j["methods"] = nlohmann::json::object();
  for (const auto& s : report.summaries) {
    j["methods"][s.method] = {{"mean_final_best", s.mean_final_best},
                              {"median_final_best", s.median_final_best},
                              {"q25_final_best", s.q25_final_best},
                              {"q75_final_best", s.q75_final_best},
                              {"mean_final_true", s.mean_final_true},
                              {"median_final_true", s.median_final_true},
                              {"recommended_combos", s.recommended_combos}};
  }
  return j.dump(2);
}

}  // namespace bnopt
