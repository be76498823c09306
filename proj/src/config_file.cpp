#include "bnopt/config_file.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bnopt/objectives.hpp"
#include "bnopt/serialization.hpp"

namespace bnopt {

SearchSpace RunConfig::resolved_space() const {
  if (space) return *space;
  if (objective.kind == ObjectiveSpec::Kind::builtin) return builtin_space(objective.name);
  throw ConfigError("external objectives need a [space] section");
}

namespace {

double parse_number(const std::string& tok, int line) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError("expected a number, got '" + tok + "'", line);
  return v;
}

long parse_int(const std::string& tok, int line) {
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError("expected an integer, got '" + tok + "'", line);
  return v;
}

bool parse_flag(const std::string& tok, int line) {
  if (tok == "on" || tok == "true" || tok == "1") return true;
  if (tok == "off" || tok == "false" || tok == "0") return false;
  throw ConfigError("expected on/off, got '" + tok + "'", line);
}

MaternNu parse_nu(const std::string& tok, int line) {
  if (tok == "1/2") return MaternNu::half;
  if (tok == "3/2") return MaternNu::three_halves;
  if (tok == "5/2") return MaternNu::five_halves;
  throw ConfigError("matern_nu must be 1/2, 3/2 or 5/2", line);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

struct TreeParser {
  RunConfig cfg;
  std::vector<QuantVarSpec> quant;
  std::vector<BranchVarSpec> branch;
  std::vector<NestedVarSpec> nested;
  bool space_section_seen = false;

  void space_line(const std::vector<std::string>& t, int ln) {
    space_section_seen = true;
    if (t[0] == "quant") {
      // quant <name> <lower> <upper> [log10]
      if (t.size() < 4 || t.size() > 5)
        throw ConfigError("quant needs: name lower upper [log10]", ln);
      QuantVarSpec q{t[1], parse_number(t[2], ln), parse_number(t[3], ln), Scale::linear};
      if (t.size() == 5) {
        if (t[4] != "log10") throw ConfigError("only log10 scaling is supported", ln);
        q.scale = Scale::log10;
      }
      quant.push_back(std::move(q));
    } else if (t[0] == "branch") {
      // branch <name> <level>...
      if (t.size() < 4) throw ConfigError("branch needs: name and at least 2 levels", ln);
      branch.push_back({t[1], {t.begin() + 2, t.end()}});
    } else if (t[0] == "nested") {
      // nested <name> <parent> <parent_level> qual <levels...> | quant <lo> <hi>
      if (t.size() < 6) throw ConfigError("nested needs: name parent level qual|quant ...", ln);
      NestedVarSpec v;
      v.name = t[1];
      v.parent = t[2];
      v.parent_level = t[3];
      if (t[4] == "qual") {
        v.kind = NestedKind::qualitative;
        v.levels.assign(t.begin() + 5, t.end());
      } else if (t[4] == "quant") {
        if (t.size() != 7) throw ConfigError("nested quant needs: lower upper", ln);
        v.kind = NestedKind::quantitative;
        v.lower = parse_number(t[5], ln);
        v.upper = parse_number(t[6], ln);
      } else {
        throw ConfigError("nested kind must be qual or quant", ln);
      }
      nested.push_back(std::move(v));
    } else {
      throw ConfigError("unknown space entry '" + t[0] + "'", ln);
    }
  }

  void objective_line(const std::vector<std::string>& t, int ln) {
    if (t[0] == "builtin") {
      if (t.size() != 2) throw ConfigError("builtin needs a name", ln);
      cfg.objective.kind = ObjectiveSpec::Kind::builtin;
      cfg.objective.name = t[1];
    } else if (t[0] == "external") {
      cfg.objective.kind = ObjectiveSpec::Kind::external;
    } else if (t[0] == "noise_sd") {
      cfg.objective.noise_sd = parse_number(t.at(1), ln);
      if (cfg.objective.noise_sd < 0) throw ConfigError("noise_sd must be >= 0", ln);
    } else {
      throw ConfigError("unknown objective entry '" + t[0] + "'", ln);
    }
  }

  void run_line(const std::vector<std::string>& t, int ln) {
    if (t[0] == "mode") {
      if (t.at(1) == "sequential") {
        cfg.mode = RunMode::sequential;
      } else if (t[1] == "batch") {
        cfg.mode = RunMode::batch;
        cfg.batch_size = t.size() > 2 ? static_cast<int>(parse_int(t[2], ln)) : 5;
        if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1", ln);
      } else {
        throw ConfigError("mode must be sequential or batch", ln);
      }
    } else if (t[0] == "n_init") {
      cfg.n_init = static_cast<int>(parse_int(t.at(1), ln));
      if (cfg.n_init < 2) throw ConfigError("n_init must be >= 2", ln);
    } else if (t[0] == "n_adaptive") {
      cfg.n_adaptive = static_cast<int>(parse_int(t.at(1), ln));
      if (cfg.n_adaptive < 0) throw ConfigError("n_adaptive must be >= 0", ln);
    } else if (t[0] == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(t.at(1), ln));
    } else if (t[0] == "out") {
      cfg.out_dir = t.at(1);
    } else {
      throw ConfigError("unknown run entry '" + t[0] + "'", ln);
    }
  }

  void fit_line(const std::vector<std::string>& t, int ln) {
    FitOptions& f = cfg.options.fit;
    auto bounds = [&](std::pair<double, double>& b) {
      b = {parse_number(t.at(1), ln), parse_number(t.at(2), ln)};
      if (!(b.first > 0) || !(b.first < b.second))
        throw ConfigError("bounds need 0 < low < high", ln);
    };
    if (t[0] == "restarts") {
      f.restarts = static_cast<int>(parse_int(t.at(1), ln));
      if (f.restarts < 1) throw ConfigError("restarts must be >= 1", ln);
    } else if (t[0] == "learn_noise") {
      f.learn_noise = parse_flag(t.at(1), ln);
    } else if (t[0] == "sigma2_mode") {
      if (t.at(1) == "mle") f.sigma2_mode = Sigma2Mode::mle;
      else if (t[1] == "conservative") f.sigma2_mode = Sigma2Mode::conservative;
      else throw ConfigError("sigma2_mode must be mle or conservative", ln);
    } else if (t[0] == "variance_form") {
      if (t.at(1) == "two_term") f.variance_form = VarianceForm::two_term;
      else if (t[1] == "three_term") f.variance_form = VarianceForm::three_term;
      else throw ConfigError("variance_form must be two_term or three_term", ln);
    } else if (t[0] == "validity") {
      if (t.at(1) == "remark1") f.validity = ValidityRule::remark1;
      else if (t[1] == "theorem1") f.validity = ValidityRule::theorem1;
      else throw ConfigError("validity must be remark1 or theorem1", ln);
    } else if (t[0] == "matern_nu") {
      f.matern_nu = parse_nu(t.at(1), ln);
    } else if (t[0] == "nugget") {
      f.nugget = parse_number(t.at(1), ln);
      if (f.nugget < 0) throw ConfigError("nugget must be >= 0", ln);
    } else if (t[0] == "theta_bounds") {
      bounds(f.theta_bounds);
    } else if (t[0] == "gamma_bounds") {
      bounds(f.gamma_bounds);
    } else if (t[0] == "phi_bounds") {
      bounds(f.phi_bounds);
    } else if (t[0] == "noise_bounds") {
      bounds(f.noise_bounds);
    } else {
      throw ConfigError("unknown fit entry '" + t[0] + "'", ln);
    }
  }

  void acq_line(const std::vector<std::string>& t, int ln) {
    AcqOptions& a = cfg.options.acq;
    if (t[0] == "epsilon") {
      a.epsilon = parse_number(t.at(1), ln);
      if (a.epsilon < 0.0 || a.epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]", ln);
    } else if (t[0] == "n_raw") {
      a.n_raw = static_cast<int>(parse_int(t.at(1), ln));
      if (a.n_raw < 1) throw ConfigError("n_raw must be >= 1", ln);
    } else if (t[0] == "n_refine") {
      a.n_refine = static_cast<int>(parse_int(t.at(1), ln));
      if (a.n_refine < 1) throw ConfigError("n_refine must be >= 1", ln);
    } else if (t[0] == "fantasy") {
      if (t.at(1) == "believer") a.fantasy = FantasyRule::believer;
      else if (t[1] == "constant_liar_max") a.fantasy = FantasyRule::constant_liar_max;
      else throw ConfigError("fantasy must be believer or constant_liar_max", ln);
    } else if (t[0] == "ymax") {
      if (t.at(1) == "observed") a.ymax_mode = YmaxMode::observed;
      else if (t[1] == "plugin") a.ymax_mode = YmaxMode::plugin;
      else throw ConfigError("ymax must be observed or plugin", ln);
    } else {
      throw ConfigError("unknown acquisition entry '" + t[0] + "'", ln);
    }
  }

  void bench_line(const std::vector<std::string>& t, int ln) {
    if (t[0] == "methods") {
      for (std::size_t i = 1; i < t.size(); ++i) {
        try {
          cfg.bench_methods.push_back(BenchMethod::parse(t[i]));
        } catch (const std::exception& e) {
          throw ConfigError(e.what(), ln);
        }
      }
    } else if (t[0] == "replicates") {
      cfg.replicates = static_cast<int>(parse_int(t.at(1), ln));
      if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1", ln);
    } else {
      throw ConfigError("unknown benchmark entry '" + t[0] + "'", ln);
    }
  }
};

RunConfig parse_tree(const std::string& text) {
  TreeParser p;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks.size() != 1 || toks[0].back() != ']')
        throw ConfigError("malformed section header", ln);
      section = toks[0].substr(1, toks[0].size() - 2);
      if (section != "space" && section != "objective" && section != "run" && section != "fit" &&
          section != "acquisition" && section != "benchmark")
        throw ConfigError("unknown section [" + section + "]", ln);
      continue;
    }
    try {
      if (section == "space") p.space_line(toks, ln);
      else if (section == "objective") p.objective_line(toks, ln);
      else if (section == "run") p.run_line(toks, ln);
      else if (section == "fit") p.fit_line(toks, ln);
      else if (section == "acquisition") p.acq_line(toks, ln);
      else if (section == "benchmark") p.bench_line(toks, ln);
      else throw ConfigError("entry outside any section", ln);
    } catch (const std::out_of_range&) {
      throw ConfigError("missing argument for '" + toks[0] + "'", ln);
    }
  }
  if (p.space_section_seen) {
    try {
      p.cfg.space = SearchSpace(std::move(p.quant), std::move(p.branch), std::move(p.nested));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return std::move(p.cfg);
}

RunConfig parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("space")) cfg.space = space_from_json(j.at("space"));
    if (j.contains("objective")) {
      const auto& jo = j.at("objective");
      std::string kind = jo.value("kind", "external");
      cfg.objective.kind =
          kind == "builtin" ? ObjectiveSpec::Kind::builtin : ObjectiveSpec::Kind::external;
      cfg.objective.name = jo.value("name", "");
      cfg.objective.noise_sd = jo.value("noise_sd", 0.0);
    }
    if (j.contains("run")) {
      const auto& jr = j.at("run");
      std::string mode = jr.value("mode", "sequential");
      if (mode == "batch") {
        cfg.mode = RunMode::batch;
        cfg.batch_size = jr.value("batch_size", 5);
      } else if (mode != "sequential") {
        throw ConfigError("run.mode must be sequential or batch");
      }
      cfg.n_init = jr.value("n_init", cfg.n_init);
      cfg.n_adaptive = jr.value("n_adaptive", cfg.n_adaptive);
      cfg.seed = jr.value("seed", cfg.seed);
      cfg.out_dir = jr.value("out", cfg.out_dir);
      if (cfg.n_init < 2) throw ConfigError("run.n_init must be >= 2");
    }
    if (j.contains("fit")) cfg.options.fit = fit_options_from_json(j.at("fit"));
    if (j.contains("acquisition")) cfg.options.acq = acq_options_from_json(j.at("acquisition"));
    if (j.contains("benchmark")) {
      const auto& jb = j.at("benchmark");
      for (const auto& m : jb.value("methods", std::vector<std::string>{}))
        cfg.bench_methods.push_back(BenchMethod::parse(m));
      cfg.replicates = jb.value("replicates", cfg.replicates);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_config(text);
  return parse_tree(text);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace bnopt
