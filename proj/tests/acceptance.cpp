// Acceptance checklist for the optimizer. Each criterion prints one
// [PASS]/[FAIL] line; the process exits nonzero if any fail.
//
//   1 kernel validity        PSD of the categorical Gram under the validity
//                            conditions, 1000 random draws
//   2 gp oracle              dense-matrix oracle equivalence to 1e-10
//   3 interpolation          noise-free fits reproduce their training data
//   4 ei correctness         closed form vs 1e6-draw Monte Carlo
//   5 synthetic benchmark    sequential search on the two-bump surface
//   6 batch vs sequential    batch-5 medians stay close to sequential
//   7 baseline dominance     sequential beats random search on paired seeds
//   8 sensitivity            tower property + parallel curves on additive data
//   9 determinism            CLI reruns are byte-identical

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bnopt/acquisition.hpp"
#include "bnopt/bench.hpp"
#include "bnopt/design.hpp"
#include "bnopt/objectives.hpp"
#include "bnopt/sensitivity.hpp"
#include <nlohmann/json.hpp>

#include "bnopt/serialization.hpp"
#include "test_support.hpp"

using namespace bnopt;
using namespace bnopt::test;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome kernel_validity() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(0xACCE551);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    SearchSpace space = random_space(rng);
    Encoder enc(space);
    ValidityRule rule = rep % 2 == 0 ? ValidityRule::remark1 : ValidityRule::theorem1;
    KernelParams params = random_valid_params(space, rng, rule);
    if (!check_validity(params, space).empty())
      return {false, "generator produced invalid params"};

    Eigen::VectorXd w = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(enc.quant_dims()), 0.3);
    std::vector<EncodedPoint> points;
    for (std::size_t c = 0; c < enc.combo_count(); ++c) {
      EncodedPoint p;
      p.quant = w;
      p.combo = static_cast<int>(c);
      p.nested_quant = Eigen::VectorXd::Constant(
          static_cast<Eigen::Index>(enc.nested_quant_dims()), kInactivePlaceholder);
      for (int slot : enc.active_slots(p.combo)) p.nested_quant[slot] = uniform01(rng);
      points.push_back(std::move(p));
    }
    Eigen::MatrixXd K = gram_matrix(enc, points, params, 0.0);
    double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
    worst = std::min(worst, min_eig);
    if (min_eig < -1e-8)
      return {false, "min eigenvalue " + fmt(min_eig) + " at draw " + std::to_string(rep)};
  }
  double secs = elapsed_s(t0);
  return {secs < 30.0,
          "1000 draws, worst eigenvalue " + fmt(worst) + ", " + fmt(secs) + " s (< 30 s)"};
}

// ---------------------------------------------------------------- 2

Outcome gp_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(0xACCE552);
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-10 * (1.0 + std::fabs(b)); };
  for (int rep = 0; rep < 200; ++rep) {
    SearchSpace space = random_space(rng);
    Encoder enc(space);
    const int n = 2 + static_cast<int>(uniform01(rng) * 7);  // 2..8
    Dataset data;
    for (int i = 0; i < n; ++i) {
      data.points.push_back(random_point(enc, rng));
      data.y.conservativeResize(data.y.size() + 1);
      data.y[data.y.size() - 1] = normal(rng);
    }
    KernelParams params = random_valid_params(space, rng);
    double noise = rep % 3 == 0 ? 0.0 : uniform01(rng) * 0.2;
    EncodedPoint probe = random_point(enc, rng);

    auto est = profile_estimates(enc, data, params, noise, 1e-8);
    auto oracle = oracle_gp(enc, data.points, data.y, params, noise, 1e-8, probe);
    if (!close(est.beta_hat, oracle.beta)) return {false, "beta mismatch at rep " + std::to_string(rep)};
    if (!close(est.sigma2_mle, oracle.sigma2))
      return {false, "sigma2 mismatch at rep " + std::to_string(rep)};

    for (auto form : {VarianceForm::two_term, VarianceForm::three_term}) {
      TrainedGP gp = TrainedGP::from_estimates(enc, data, params, est.beta_hat, est.sigma2_mle,
                                               noise, 1e-8, form);
      Posterior post = gp.posterior(probe);
      double want_var =
          std::max(0.0, form == VarianceForm::two_term ? oracle.var_two_term : oracle.var_three_term);
      if (!close(post.mean, oracle.mean)) return {false, "mean mismatch at rep " + std::to_string(rep)};
      if (!close(post.var, want_var)) return {false, "variance mismatch at rep " + std::to_string(rep)};
    }
  }
  double secs = elapsed_s(t0);
  return {secs < 10.0, "200 cases to 1e-10, " + fmt(secs) + " s (< 10 s)"};
}

// ---------------------------------------------------------------- 3

Outcome interpolation() {
  Rng rng = make_rng(0xACCE553);
  FitOptions opts;
  opts.restarts = 2;
  opts.learn_noise = false;
  opts.search.max_evals = 120;
  for (int rep = 0; rep < 100; ++rep) {
    SearchSpace space = random_space(rng);
    Encoder enc(space);
    const int n = 6 + static_cast<int>(uniform01(rng) * 6);
    Dataset data;
    for (int i = 0; i < n; ++i) {
      EncodedPoint p = random_point(enc, rng);
      double y = std::sin(3.0 * p.quant.sum()) + 0.4 * static_cast<double>(p.combo);
      data.points.push_back(std::move(p));
      data.y.conservativeResize(data.y.size() + 1);
      data.y[data.y.size() - 1] = y;
    }
    TrainedGP gp = fit(enc, data, opts, static_cast<std::uint64_t>(rep));
    for (std::size_t i = 0; i < data.size(); ++i) {
      Posterior post = gp.posterior(data.points[i]);
      double y = data.y[static_cast<Eigen::Index>(i)];
      if (std::fabs(post.mean - y) > 1e-6 * (1.0 + std::fabs(y)))
        return {false, "mean off by " + fmt(std::fabs(post.mean - y)) + " at rep " +
                           std::to_string(rep)};
      if (post.var > 1e-6)
        return {false, "variance " + fmt(post.var) + " at rep " + std::to_string(rep)};
    }
  }
  return {true, "100 noise-free fits reproduce training data to 1e-6"};
}

// ---------------------------------------------------------------- 4

Outcome ei_correctness() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(0xACCE554);
  const int draws = 1000000;
  std::vector<double> zs(draws);
  for (auto& z : zs) z = normal(rng);

  double worst_sigma = 0.0;
  for (double delta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      for (double ymax : {-1.0, 0.0, 3.0}) {
        double mean = ymax + delta;
        double sum = 0.0, sumsq = 0.0;
        for (double z : zs) {
          double imp = std::max(mean + s * z - ymax, 0.0);
          sum += imp;
          sumsq += imp * imp;
        }
        double mc = sum / draws;
        double se = std::sqrt(std::max(0.0, sumsq / draws - mc * mc) / draws);
        double ei = expected_improvement(mean, s * s, ymax);
        double gap = std::fabs(ei - mc);
        if (gap > 3.0 * se + 1e-12)
          return {false, "EI off by " + fmt(gap) + " (3 se = " + fmt(3 * se) + ") at delta=" +
                             fmt(delta) + " s=" + fmt(s)};
        if (se > 0) worst_sigma = std::max(worst_sigma, gap / se);
      }
    }
  }
  double secs = elapsed_s(t0);
  return {secs < 30.0, "75 grid points, worst gap " + fmt(worst_sigma) + " se, " + fmt(secs) +
                           " s (< 30 s)"};
}

// ---------------------------------------------------------------- 5-7

struct BenchBundle {
  BenchReport seq, batch, random;
  double seconds = 0.0;
};

BenchBundle run_paper_benchmark() {
  BenchBundle b;
  Objective obj = make_builtin_objective("bn2d", 0.2);
  StudyOptions opts;  // production defaults
  const std::uint64_t seed = 2024;
  auto t0 = std::chrono::steady_clock::now();
  b.seq = run_benchmark({BenchMethod::Kind::bn_sequential, 1}, obj, bn2d_space(), 10, 50, 20, seed,
                        opts);
  b.seconds = elapsed_s(t0);
  b.batch = run_benchmark({BenchMethod::Kind::bn_batch, 5}, obj, bn2d_space(), 10, 50, 20, seed,
                          opts);
  b.random = run_benchmark({BenchMethod::Kind::random_search, 1}, obj, bn2d_space(), 10, 50, 20,
                           seed, opts);
  return b;
}

Outcome synthetic_benchmark(const BenchBundle& b) {
  const MethodSummary& s = b.seq.summaries.at(0);
  int combo_hits = 0;
  for (const auto& t : b.seq.traces)
    if (t.recommended_combo == "z=2,v=1") ++combo_hits;
  double combo_frac = combo_hits / 20.0;

  bool pass = s.median_final_best >= 4.9 && s.median_final_true >= 4.6 && combo_frac >= 0.6 &&
              b.seconds < 600.0;
  return {pass, "median best-observed " + fmt(s.median_final_best) + " (>= 4.9), median true " +
                    fmt(s.median_final_true) + " (>= 4.6), combo z=2,v=1 in " +
                    fmt(100 * combo_frac) + "% (>= 60%), " + fmt(b.seconds) + " s (< 600 s)"};
}

Outcome batch_vs_sequential(const BenchBundle& b) {
  double seq = b.seq.summaries.at(0).median_final_best;
  double bat = b.batch.summaries.at(0).median_final_best;
  double gap = std::fabs(bat - seq);
  return {gap <= 0.3, "sequential median " + fmt(seq) + ", batch median " + fmt(bat) + ", gap " +
                          fmt(gap) + " (<= 0.3)"};
}

Outcome baseline_dominance(const BenchBundle& b) {
  int wins = 0;
  for (int r = 0; r < 20; ++r) {
    double bn = b.seq.traces.at(static_cast<std::size_t>(r)).final_true;
    double rs = b.random.traces.at(static_cast<std::size_t>(r)).final_true;
    if (bn > rs) ++wins;
  }
  return {wins >= 16, "sequential beats random search in " + std::to_string(wins) +
                          "/20 paired replicates (>= 16)"};
}

// ---------------------------------------------------------------- 8

Outcome sensitivity_consistency() {
  Objective obj = make_builtin_objective("bn2d", 0.0);
  SearchSpace space = bn2d_space();
  Encoder enc(space);
  FitOptions fopts;
  fopts.restarts = 4;
  fopts.learn_noise = false;
  fopts.search.max_evals = 200;

  // tower property: averaging the x1 main effect over its grid reproduces the
  // grand mean taken under the same measure
  Dataset data;
  for (const auto& cfg : sample_initial_design(space, 40, 77)) {
    data.points.push_back(enc.encode(cfg));
    data.y.conservativeResize(data.y.size() + 1);
    data.y[data.y.size() - 1] = obj.truth(cfg);
  }
  TrainedGP gp = fit(enc, data, fopts, 77);

  const int G = 41, n_mc = 2000;
  std::vector<GridValue> grid;
  std::vector<double> midpoints;
  for (int i = 0; i < G; ++i) {
    midpoints.push_back(-10.0 + 20.0 * (i + 0.5) / G);
    grid.emplace_back(midpoints.back());
  }
  EffectCurve curve = main_effect(gp, "x1", grid, n_mc, 101);
  double curve_avg = 0.0, curve_se2 = 0.0;
  for (int i = 0; i < G; ++i) {
    curve_avg += curve.values[static_cast<std::size_t>(i)];
    curve_se2 +=
        curve.std_err[static_cast<std::size_t>(i)] * curve.std_err[static_cast<std::size_t>(i)];
  }
  curve_avg /= G;
  curve_se2 /= static_cast<double>(G) * G;

  Rng rng = make_rng(103);
  double grand = 0.0, grand_sq = 0.0;
  const int n_grand = 20000;
  for (int t = 0; t < n_grand; ++t) {
    Configuration cfg;
    cfg.quant_values["x1"] = midpoints[static_cast<std::size_t>(uniform01(rng) * G) % G];
    cfg.quant_values["x2"] = -5.0 + 10.0 * uniform01(rng);
    int z = uniform01(rng) < 0.5 ? 1 : 2;
    cfg.branch_values["z"] = std::to_string(z);
    int g = z == 1 ? 3 : 2;
    cfg.nested_values["v"] = std::to_string(1 + std::min(static_cast<int>(uniform01(rng) * g), g - 1));
    double m = gp.posterior(cfg).mean;
    grand += m;
    grand_sq += m * m;
  }
  grand /= n_grand;
  double grand_se2 = std::max(0.0, grand_sq / n_grand - grand * grand) / n_grand;
  double tower_gap = std::fabs(curve_avg - grand);
  double tower_band = 3.0 * std::sqrt(curve_se2 + grand_se2);
  if (tower_gap > tower_band)
    return {false, "tower gap " + fmt(tower_gap) + " > 3 se " + fmt(tower_band)};

  // additive surface: interaction curves must be parallel within 3 ses
  SearchSpace add_space({{"a", 0.0, 1.0, Scale::linear}, {"b", 0.0, 1.0, Scale::linear}}, {}, {});
  Encoder add_enc(add_space);
  auto additive = [](const Configuration& c) {
    return std::exp(-2.0 * c.quant_values.at("a")) + 1.0 / (1.0 + c.quant_values.at("b"));
  };
  Dataset add_data;
  for (const auto& cfg : sample_initial_design(add_space, 40, 7)) {
    add_data.points.push_back(add_enc.encode(cfg));
    add_data.y.conservativeResize(add_data.y.size() + 1);
    add_data.y[add_data.y.size() - 1] = additive(cfg);
  }
  TrainedGP add_gp = fit(add_enc, add_data, fopts, 7);
  auto grid_a = default_grid(add_space, resolve_variable(add_space, "a"), 21);
  auto levels_b = default_levels(add_space, resolve_variable(add_space, "b"), 5);
  auto curves = interaction_effect(add_gp, "a", "b", grid_a, levels_b, n_mc, 107);

  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      double shift = 0.0;
      for (std::size_t g = 0; g < grid_a.size(); ++g)
        shift += curves[i].values[g] - curves[j].values[g];
      shift /= static_cast<double>(grid_a.size());
      for (std::size_t g = 0; g < grid_a.size(); ++g) {
        double dev = std::fabs(curves[i].values[g] - curves[j].values[g] - shift);
        double se = std::sqrt(curves[i].std_err[g] * curves[i].std_err[g] +
                              curves[j].std_err[g] * curves[j].std_err[g]);
        if (se > 0) worst_ratio = std::max(worst_ratio, dev / se);
        if (dev > 3.0 * se)
          return {false, "parallel deviation " + fmt(dev) + " > 3 se " + fmt(3 * se)};
      }
    }
  }
  return {true, "tower gap " + fmt(tower_gap) + " <= 3 se " + fmt(tower_band) +
                    "; worst parallel deviation " + fmt(worst_ratio) + " se (<= 3)"};
}

// ---------------------------------------------------------------- 9

int run_cli(const std::string& args) {
  std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome determinism() {
  if (g_cli_path.empty()) return {false, "no --cli path given"};
  fs::path dir = fs::temp_directory_path() / "bnopt_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);

  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "[objective]\nbuiltin bn2d\nnoise_sd 0.2\n"
           "[run]\nmode sequential\nn_init 6\nn_adaptive 4\nseed 31\n"
           "[fit]\nrestarts 3\n[acquisition]\nn_raw 24\nn_refine 2\n"
           "[benchmark]\nmethods bn_sequential random_search\nreplicates 2\n";
  }
  const std::string cfg = (dir / "run.cfg").string();
  for (const char* tag : {"a", "b"}) {
    if (run_cli("optimize " + cfg + " --out " + (dir / tag / "opt").string()) != 0)
      return {false, "optimize failed"};
    if (run_cli("benchmark " + cfg + " --out " + (dir / tag / "bench").string()) != 0)
      return {false, "benchmark failed"};
    if (run_cli("sensitivity " + (dir / tag / "opt" / "study.json").string() +
                " --var x1 --var z --grid 7 --n-mc 200 --out " +
                (dir / tag / "effects.csv").string()) != 0)
      return {false, "sensitivity failed"};
  }
  for (const char* rel :
       {"opt/study.json", "opt/trace.csv", "opt/recommendation.json", "bench/bench_trace.csv",
        "bench/bench_summary.json", "effects.csv"}) {
    if (slurp(dir / "a" / rel) != slurp(dir / "b" / rel))
      return {false, std::string("differs between reruns: ") + rel};
    if (slurp(dir / "a" / rel).empty()) return {false, std::string("empty artifact: ") + rel};
  }
  return {true, "optimize, benchmark, sensitivity reruns byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  criteria.emplace_back("kernel validity (PSD under Theorem-style conditions)", kernel_validity);
  criteria.emplace_back("gp correctness (dense oracle equivalence)", gp_oracle);
  criteria.emplace_back("interpolation (noise-free fits)", interpolation);
  criteria.emplace_back("ei correctness (Monte Carlo agreement)", ei_correctness);

  BenchBundle bundle;
  bool bench_ready = false;
  auto ensure_bench = [&]() {
    if (!bench_ready) {
      std::cout << "running synthetic benchmark (60 evals x 20 replicates x 3 methods)..."
                << std::endl;
      bundle = run_paper_benchmark();
      bench_ready = true;
    }
  };
  criteria.emplace_back("synthetic benchmark (sequential)", [&]() {
    ensure_bench();
    return synthetic_benchmark(bundle);
  });
  criteria.emplace_back("batch vs sequential", [&]() {
    ensure_bench();
    return batch_vs_sequential(bundle);
  });
  criteria.emplace_back("baseline dominance over random search", [&]() {
    ensure_bench();
    return baseline_dominance(bundle);
  });
  criteria.emplace_back("sensitivity consistency", sensitivity_consistency);
  criteria.emplace_back("determinism of CLI artifacts", determinism);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
              << criteria[i].first << " -- " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILED") << " (" << failures
            << " failing)" << std::endl;
  return failures == 0 ? 0 : 1;
}
