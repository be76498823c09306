// bnopt command line: run studies against builtin objectives, serve the
// ask-tell protocol for external ones, reproduce benchmarks, and emit
// sensitivity curves from a persisted study.
//
// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 protocol misuse.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bnopt/bench.hpp"
#include "bnopt/config_file.hpp"
#include "bnopt/design.hpp"
#include "bnopt/objectives.hpp"
#include "bnopt/sensitivity.hpp"
#include "bnopt/serialization.hpp"
#include "bnopt/study.hpp"

namespace fs = std::filesystem;
using namespace bnopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitProtocol = 4;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Column layout for trace.csv: one column per distinct variable name, empty
// cells for inactive nested values.
std::vector<std::string> variable_columns(const SearchSpace& space) {
  std::vector<std::string> cols;
  for (const auto& q : space.quant()) cols.push_back(q.name);
  for (const auto& b : space.branch()) cols.push_back(b.name);
  for (const auto& v : space.nested())
    if (std::find(cols.begin(), cols.end(), v.name) == cols.end()) cols.push_back(v.name);
  return cols;
}

std::string cell_for(const Configuration& cfg, const std::string& name) {
  if (auto it = cfg.quant_values.find(name); it != cfg.quant_values.end())
    return format_double(it->second);
  if (auto it = cfg.branch_values.find(name); it != cfg.branch_values.end()) return it->second;
  if (auto it = cfg.nested_values.find(name); it != cfg.nested_values.end()) {
    if (const auto* d = std::get_if<double>(&it->second)) return format_double(*d);
    return std::get<std::string>(it->second);
  }
  return "";
}

void write_trace_csv(const std::string& path, const StudyState& st) {
  std::ofstream os(path);
  auto cols = variable_columns(st.space);
  os << "eval_index,iteration,source,ok,y,best_observed";
  for (const auto& c : cols) os << "," << c;
  os << "\n";
  for (std::size_t i = 0; i < st.observations.size(); ++i) {
    const auto& o = st.observations[i];
    os << i << "," << o.iteration << "," << o.source << "," << (o.ok ? 1 : 0) << ","
       << format_double(o.y) << "," << format_double(st.best_so_far[i]);
    for (const auto& c : cols) os << "," << cell_for(o.config, c);
    os << "\n";
  }
}

void write_recommendation(const std::string& path, const Study& study, const Objective* obj) {
  auto [best, idx] = study.recommend();
  nlohmann::json j{{"eval_index", idx},
                   {"iteration", best.iteration},
                   {"y", best.y},
                   {"config", config_to_json(best.config)}};
  if (obj != nullptr && obj->truth) j["true_value"] = obj->truth(best.config);
  std::ofstream os(path);
  os << j.dump(2) << "\n";
}

// A builtin objective must accept configurations drawn from the declared
// space; probe a few before running anything expensive.
void probe_builtin(const SearchSpace& space, const Objective& obj) {
  for (const auto& cfg : sample_initial_design(space, 4, 0)) {
    try {
      obj.truth(cfg);
    } catch (const std::exception& e) {
      throw ConfigError("objective '" + obj.spec.name +
                        "' rejects configurations from the declared space: " + e.what());
    }
  }
}

int cmd_optimize(const std::string& config_path, const std::string& out_override,
                 bool validate_only) {
  RunConfig cfg;
  try {
    cfg = parse_config_file(config_path);
    SearchSpace space = cfg.resolved_space();
    if (cfg.objective.kind == ObjectiveSpec::Kind::builtin)
      probe_builtin(space, make_builtin_objective(cfg.objective));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (validate_only) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  fs::create_directories(cfg.out_dir);
  const std::string study_path = (fs::path(cfg.out_dir) / "study.json").string();

  try {
    if (cfg.objective.kind == ObjectiveSpec::Kind::builtin) {
      Objective obj = make_builtin_objective(cfg.objective);
      Study study = Study::init(cfg.resolved_space(), cfg.objective, cfg.options, cfg.mode,
                                cfg.batch_size, cfg.n_init, cfg.n_adaptive, cfg.seed, &obj);
      study.run(obj);
      save_study(study_path, study.state());
      write_trace_csv((fs::path(cfg.out_dir) / "trace.csv").string(), study.state());
      write_recommendation((fs::path(cfg.out_dir) / "recommendation.json").string(), study, &obj);
      auto [best, idx] = study.recommend();
      std::cout << "best y = " << format_double(best.y) << " at evaluation " << idx << "\n";
    } else {
      Study study = Study::init(cfg.resolved_space(), cfg.objective, cfg.options, cfg.mode,
                                cfg.batch_size, cfg.n_init, cfg.n_adaptive, cfg.seed, nullptr);
      save_study(study_path, study.state());
      std::cout << "external objective: initialized " << study_path << " with "
                << study.state().pending.size()
                << " pending configurations; drive it with 'bnopt suggest' and 'bnopt tell'\n";
    }
  } catch (const FitError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  return cmd_optimize(config_path, "", /*validate_only=*/true);
}

int cmd_suggest(const std::string& study_path) {
  try {
    StudyLock lock(study_path);
    Study study = Study::resume(load_study(study_path));
    const auto& pending = study.suggest();
    for (const auto& p : pending) {
      nlohmann::json j{{"token", p.token}, {"config", config_to_json(p.config)},
                       {"source", p.source}, {"told", p.result.has_value()}};
      std::cout << j.dump() << "\n";
    }
    if (pending.empty()) std::cerr << "budget exhausted; nothing to suggest\n";
    save_study(study_path, study.state());
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const FitError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_tell(const std::string& study_path, const std::string& token, double y) {
  try {
    StudyLock lock(study_path);
    Study study = Study::resume(load_study(study_path));
    study.tell(token, y);
    if (!std::isfinite(y))
      std::cerr << "warning: non-finite result recorded as a failed observation\n";
    save_study(study_path, study.state());
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_override) {
  RunConfig cfg;
  Objective obj;
  try {
    cfg = parse_config_file(config_path);
    if (cfg.objective.kind != ObjectiveSpec::Kind::builtin)
      throw ConfigError("benchmark needs a builtin objective");
    obj = make_builtin_objective(cfg.objective);
    probe_builtin(cfg.resolved_space(), obj);
    if (cfg.bench_methods.empty())
      cfg.bench_methods.push_back({BenchMethod::Kind::bn_sequential, 1});
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!out_override.empty()) cfg.out_dir = out_override;
  fs::create_directories(cfg.out_dir);
  try {
    std::vector<BenchReport> parts;
    for (const auto& m : cfg.bench_methods) {
      std::cerr << "running " << m.tag() << " x" << cfg.replicates << " replicates...\n";
      parts.push_back(run_benchmark(m, obj, cfg.resolved_space(), cfg.n_init, cfg.n_adaptive,
                                    cfg.replicates, cfg.seed, cfg.options));
    }
    BenchReport report = merge_reports(std::move(parts));
    {
      std::ofstream os(fs::path(cfg.out_dir) / "bench_trace.csv");
      write_bench_csv(os, report);
    }
    {
      std::ofstream os(fs::path(cfg.out_dir) / "bench_summary.json");
      os << bench_summary_json(report) << "\n";
    }
    std::cout << bench_summary_json(report) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_sensitivity(const std::string& study_path, const std::vector<std::string>& vars,
                    const std::vector<std::string>& pairs, int grid_count, int level_count,
                    int n_mc, std::uint64_t seed_override, bool seed_given,
                    const std::string& out_path) {
  try {
    StudyState st = load_study(study_path);
    Encoder enc(st.space);
    Dataset data;
    for (const auto& o : st.observations) {
      if (!o.ok) continue;
      data.points.push_back(enc.encode(o.config));
      data.y.conservativeResize(data.y.size() + 1);
      data.y[data.y.size() - 1] = o.y;
    }
    if (data.size() < 2) {
      std::cerr << "error: study has fewer than 2 successful observations\n";
      return kExitNumeric;
    }
    const std::uint64_t fit_seed = mix_seed(st.seed, 0x5E11);
    const std::uint64_t mc_seed = seed_given ? seed_override : mix_seed(st.seed, 0x3C);
    const KernelParams* warm = st.last_params ? &*st.last_params : nullptr;
    TrainedGP gp = fit(enc, data, st.options.fit, fit_seed, warm, st.last_noise_ratio);

    std::vector<EffectCurve> curves;
    for (const auto& v : vars) {
      VariableRef ref = resolve_variable(st.space, v);
      curves.push_back(main_effect(gp, v, default_grid(st.space, ref, grid_count), n_mc, mc_seed));
    }
    for (const auto& p : pairs) {
      auto comma = p.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("--pair expects 'var1,var2', got '" + p + "'");
      std::string v1 = p.substr(0, comma), v2 = p.substr(comma + 1);
      VariableRef r1 = resolve_variable(st.space, v1);
      VariableRef r2 = resolve_variable(st.space, v2);
      auto part = interaction_effect(gp, v1, v2, default_grid(st.space, r1, grid_count),
                                     default_levels(st.space, r2, level_count), n_mc, mc_seed);
      for (auto& c : part) curves.push_back(std::move(c));
    }

    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    {
      std::ofstream os(out);
      write_effects_csv(os, curves);
    }
    {
      nlohmann::json meta{{"averaging", "uniform"},
                          {"n_mc", n_mc},
                          {"grid", grid_count},
                          {"levels", level_count},
                          {"mc_seed", mc_seed},
                          {"fit_seed", fit_seed},
                          {"study", study_path}};
      std::ofstream os(out.string() + ".meta.json");
      os << meta.dump(2) << "\n";
    }
    std::cout << "wrote " << out.string() << " (" << curves.size() << " curves)\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FitError& e) {
    std::cerr << "fit failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization for branching and nested search spaces"};
  app.require_subcommand(1);

  std::string config_path, study_path, out_dir, token, out_csv = "effects.csv";
  double told_y = 0.0;
  bool validate_only = false;
  std::vector<std::string> vars, pairs;
  int grid_count = 21, level_count = 5, n_mc = 2000;
  std::uint64_t sens_seed = 0;

  auto* optimize = app.add_subcommand("optimize", "run a study from a config file");
  optimize->add_option("config", config_path, "config file (tree or JSON)")->required();
  optimize->add_option("--out", out_dir, "override the output directory");
  optimize->add_flag("--validate-only", validate_only, "check the config and exit");

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("config", config_path)->required();

  auto* suggest = app.add_subcommand("suggest", "emit pending configurations of a study");
  suggest->add_option("study", study_path)->required();

  auto* tell = app.add_subcommand("tell", "bind a result to a suggested token");
  tell->add_option("study", study_path)->required();
  tell->add_option("token", token)->required();
  tell->add_option("y", told_y, "observed response (nan marks a failure)")->required();

  auto* benchmark = app.add_subcommand("benchmark", "run benchmark replicates");
  benchmark->add_option("config", config_path)->required();
  benchmark->add_option("--out", out_dir);

  auto* sensitivity = app.add_subcommand("sensitivity", "Monte Carlo effects from a study");
  sensitivity->add_option("study", study_path)->required();
  sensitivity->add_option("--var", vars, "main-effect variable (repeatable)");
  sensitivity->add_option("--pair", pairs, "interaction pair 'var1,var2' (repeatable)");
  sensitivity->add_option("--grid", grid_count, "grid points per curve");
  sensitivity->add_option("--levels", level_count, "conditioning levels per pair");
  sensitivity->add_option("--n-mc", n_mc, "Monte Carlo draws per grid point");
  auto* seed_opt = sensitivity->add_option("--seed", sens_seed, "Monte Carlo seed");
  sensitivity->add_option("--out", out_csv, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  if (optimize->parsed()) return cmd_optimize(config_path, out_dir, validate_only);
  if (validate->parsed()) return cmd_validate(config_path);
  if (suggest->parsed()) return cmd_suggest(study_path);
  if (tell->parsed()) return cmd_tell(study_path, token, told_y);
  if (benchmark->parsed()) return cmd_benchmark(config_path, out_dir);
  if (sensitivity->parsed()) {
    if (vars.empty() && pairs.empty()) {
      std::cerr << "error: give at least one --var or --pair\n";
      return kExitConfig;
    }
    return cmd_sensitivity(study_path, vars, pairs, grid_count, level_count, n_mc, sens_seed,
                           seed_opt->count() > 0, out_csv);
  }
  return kExitOk;
}
