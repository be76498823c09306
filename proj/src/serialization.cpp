#include "bnopt/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bnopt {

namespace {

std::string scale_name(Scale s) { return s == Scale::log10 ? "log10" : "linear"; }
Scale scale_from(const std::string& s) {
  if (s == "log10") return Scale::log10;
  if (s == "linear") return Scale::linear;
  throw std::invalid_argument("unknown scale '" + s + "'");
}

std::string nu_name(MaternNu nu) {
  switch (nu) {
    case MaternNu::half: return "1/2";
    case MaternNu::three_halves: return "3/2";
    case MaternNu::five_halves: return "5/2";
  }
  return "5/2";
}
MaternNu nu_from(const std::string& s) {
  if (s == "1/2") return MaternNu::half;
  if (s == "3/2") return MaternNu::three_halves;
  if (s == "5/2") return MaternNu::five_halves;
  throw std::invalid_argument("unknown matern_nu '" + s + "'");
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
Eigen::VectorXd vector_from_json(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

// NaN round-trips as null.
Json num_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
double num_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

Json space_to_json(const SearchSpace& space) {
  Json j;
  j["quant"] = Json::array();
  for (const auto& q : space.quant())
    j["quant"].push_back(
        {{"name", q.name}, {"lower", q.lower}, {"upper", q.upper}, {"scale", scale_name(q.scale)}});
  j["branch"] = Json::array();
  for (const auto& b : space.branch())
    j["branch"].push_back({{"name", b.name}, {"levels", b.levels}});
  j["nested"] = Json::array();
  for (const auto& v : space.nested()) {
    Json n{{"name", v.name}, {"parent", v.parent}, {"parent_level", v.parent_level}};
    if (v.kind == NestedKind::quantitative) {
      n["kind"] = "quantitative";
      n["lower"] = v.lower;
      n["upper"] = v.upper;
    } else {
      n["kind"] = "qualitative";
      n["levels"] = v.levels;
    }
    j["nested"].push_back(std::move(n));
  }
  return j;
}

SearchSpace space_from_json(const Json& j) {
  std::vector<QuantVarSpec> quant;
  for (const auto& q : j.value("quant", Json::array()))
    quant.push_back({q.at("name").get<std::string>(), q.at("lower").get<double>(),
                     q.at("upper").get<double>(), scale_from(q.value("scale", "linear"))});
  std::vector<BranchVarSpec> branch;
  for (const auto& b : j.value("branch", Json::array()))
    branch.push_back(
        {b.at("name").get<std::string>(), b.at("levels").get<std::vector<std::string>>()});
  std::vector<NestedVarSpec> nested;
  for (const auto& n : j.value("nested", Json::array())) {
    NestedVarSpec v;
    v.name = n.at("name").get<std::string>();
    v.parent = n.at("parent").get<std::string>();
    v.parent_level = n.at("parent_level").get<std::string>();
    if (n.at("kind").get<std::string>() == "quantitative") {
      v.kind = NestedKind::quantitative;
      v.lower = n.at("lower").get<double>();
      v.upper = n.at("upper").get<double>();
    } else {
      v.kind = NestedKind::qualitative;
      v.levels = n.at("levels").get<std::vector<std::string>>();
    }
    nested.push_back(std::move(v));
  }
  return SearchSpace(std::move(quant), std::move(branch), std::move(nested));
}

Json config_to_json(const Configuration& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.quant_values) j[k] = v;
  for (const auto& [k, v] : cfg.branch_values) j[k] = v;
  for (const auto& [k, v] : cfg.nested_values) {
    if (const auto* d = std::get_if<double>(&v))
      j[k] = *d;
    else
      j[k] = std::get<std::string>(v);
  }
  return j;
}

Configuration config_from_json(const SearchSpace& space, const Json& j) {
  Configuration cfg;
  for (const auto& q : space.quant())
    if (j.contains(q.name)) cfg.quant_values[q.name] = j.at(q.name).get<double>();
  for (const auto& b : space.branch())
    if (j.contains(b.name)) cfg.branch_values[b.name] = j.at(b.name).get<std::string>();
  for (const auto& v : space.nested()) {
    if (!j.contains(v.name) || cfg.nested_values.count(v.name)) continue;
    if (v.kind == NestedKind::quantitative)
      cfg.nested_values[v.name] = j.at(v.name).get<double>();
    else
      cfg.nested_values[v.name] = j.at(v.name).get<std::string>();
  }
  return cfg;
}

Json kernel_params_to_json(const KernelParams& p) {
  return Json{{"theta", vector_to_json(p.theta)},
              {"gamma", vector_to_json(p.gamma)},
              {"phi", vector_to_json(p.phi)},
              {"nu", nu_name(p.nu)}};
}

KernelParams kernel_params_from_json(const Json& j) {
  KernelParams p;
  p.theta = vector_from_json(j.at("theta"));
  p.gamma = vector_from_json(j.at("gamma"));
  p.phi = vector_from_json(j.at("phi"));
  p.nu = nu_from(j.value("nu", "5/2"));
  return p;
}

Json fit_options_to_json(const FitOptions& o) {
  return Json{{"theta_bounds", {o.theta_bounds.first, o.theta_bounds.second}},
              {"gamma_bounds", {o.gamma_bounds.first, o.gamma_bounds.second}},
              {"phi_bounds", {o.phi_bounds.first, o.phi_bounds.second}},
              {"noise_bounds", {o.noise_bounds.first, o.noise_bounds.second}},
              {"restarts", o.restarts},
              {"learn_noise", o.learn_noise},
              {"sigma2_mode", o.sigma2_mode == Sigma2Mode::mle ? "mle" : "conservative"},
              {"variance_form",
               o.variance_form == VarianceForm::two_term ? "two_term" : "three_term"},
              {"validity", o.validity == ValidityRule::remark1 ? "remark1" : "theorem1"},
              {"matern_nu", nu_name(o.matern_nu)},
              {"nugget", o.nugget}};
}

FitOptions fit_options_from_json(const Json& j) {
  FitOptions o;
  auto pair_of = [&](const char* key, std::pair<double, double> dflt) {
    if (!j.contains(key)) return dflt;
    return std::make_pair(j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>());
  };
  o.theta_bounds = pair_of("theta_bounds", o.theta_bounds);
  o.gamma_bounds = pair_of("gamma_bounds", o.gamma_bounds);
  o.phi_bounds = pair_of("phi_bounds", o.phi_bounds);
  o.noise_bounds = pair_of("noise_bounds", o.noise_bounds);
  o.restarts = j.value("restarts", o.restarts);
  o.learn_noise = j.value("learn_noise", o.learn_noise);
  o.sigma2_mode =
      j.value("sigma2_mode", "mle") == std::string("mle") ? Sigma2Mode::mle : Sigma2Mode::conservative;
  o.variance_form = j.value("variance_form", "two_term") == std::string("two_term")
                        ? VarianceForm::two_term
                        : VarianceForm::three_term;
  o.validity = j.value("validity", "remark1") == std::string("remark1") ? ValidityRule::remark1
                                                                        : ValidityRule::theorem1;
  o.matern_nu = nu_from(j.value("matern_nu", "5/2"));
  o.nugget = j.value("nugget", o.nugget);
  return o;
}

Json acq_options_to_json(const AcqOptions& o) {
  return Json{{"epsilon", o.epsilon},
              {"n_raw", o.n_raw},
              {"n_refine", o.n_refine},
              {"batch_size", o.batch_size},
              {"fantasy", o.fantasy == FantasyRule::believer ? "believer" : "constant_liar_max"},
              {"ymax", o.ymax_mode == YmaxMode::observed ? "observed" : "plugin"}};
}

AcqOptions acq_options_from_json(const Json& j) {
  AcqOptions o;
  o.epsilon = j.value("epsilon", o.epsilon);
  o.n_raw = j.value("n_raw", o.n_raw);
  o.n_refine = j.value("n_refine", o.n_refine);
  o.batch_size = j.value("batch_size", o.batch_size);
  o.fantasy = j.value("fantasy", "believer") == std::string("believer")
                  ? FantasyRule::believer
                  : FantasyRule::constant_liar_max;
  o.ymax_mode =
      j.value("ymax", "observed") == std::string("observed") ? YmaxMode::observed : YmaxMode::plugin;
  return o;
}

Json gp_to_json(const TrainedGP& gp) {
  return Json{{"params", kernel_params_to_json(gp.params())},
              {"beta_hat", gp.beta_hat()},
              {"sigma2_hat", gp.sigma2_hat()},
              {"noise_ratio", gp.noise_ratio()},
              {"noise_var", gp.noise_var()},
              {"nugget", gp.nugget()},
              {"variance_form",
               gp.variance_form() == VarianceForm::two_term ? "two_term" : "three_term"}};
}

TrainedGP gp_from_json(const SearchSpace& space, const Dataset& data, const Json& j) {
  return TrainedGP::from_estimates(
      Encoder(space), data, kernel_params_from_json(j.at("params")), j.at("beta_hat").get<double>(),
      j.at("sigma2_hat").get<double>(), j.at("noise_ratio").get<double>(),
      j.value("nugget", 1e-8),
      j.value("variance_form", "two_term") == std::string("two_term") ? VarianceForm::two_term
                                                                      : VarianceForm::three_term);
}

Json study_to_json(const StudyState& st) {
  Json j;
  j["schema_version"] = StudyState::schema_version;
  j["space"] = space_to_json(st.space);
  j["objective"] = Json{
      {"kind", st.objective.kind == ObjectiveSpec::Kind::builtin ? "builtin" : "external"},
      {"name", st.objective.name},
      {"noise_sd", st.objective.noise_sd}};
  j["options"] = Json{{"fit", fit_options_to_json(st.options.fit)},
                      {"acquisition", acq_options_to_json(st.options.acq)},
                      {"max_nugget", st.options.max_nugget}};
  j["mode"] = st.mode == RunMode::sequential ? "sequential" : "batch";
  j["batch_size"] = st.batch_size;
  j["n_init"] = st.n_init;
  j["n_adaptive"] = st.n_adaptive;
  j["seed"] = st.seed;
  j["event_counter"] = st.event_counter;
  j["generation"] = st.generation;

  j["observations"] = Json::array();
  for (const auto& o : st.observations)
    j["observations"].push_back({{"config", config_to_json(o.config)},
                                 {"y", num_or_null(o.y)},
                                 {"iteration", o.iteration},
                                 {"source", o.source},
                                 {"ok", o.ok}});
  j["best_so_far"] = Json::array();
  for (double b : st.best_so_far) j["best_so_far"].push_back(num_or_null(b));

  j["pending"] = Json::array();
  for (const auto& p : st.pending) {
    Json e{{"token", p.token}, {"config", config_to_json(p.config)}, {"source", p.source}};
    e["result"] = p.result ? num_or_null(*p.result) : Json(nullptr);
    e["told"] = p.result.has_value();
    j["pending"].push_back(std::move(e));
  }

  if (st.last_params) {
    j["last_fit"] = Json{{"params", kernel_params_to_json(*st.last_params)},
                         {"noise_ratio", st.last_noise_ratio}};
  } else {
    j["last_fit"] = nullptr;
  }
  return j;
}

StudyState study_from_json(const Json& j) {
  if (j.value("schema_version", 0) != StudyState::schema_version)
    throw std::invalid_argument("study file: unsupported schema_version");
  StudyState st;
  st.space = space_from_json(j.at("space"));
  const auto& jo = j.at("objective");
  st.objective.kind = jo.at("kind").get<std::string>() == "builtin" ? ObjectiveSpec::Kind::builtin
                                                                    : ObjectiveSpec::Kind::external;
  st.objective.name = jo.value("name", "");
  st.objective.noise_sd = jo.value("noise_sd", 0.0);
  st.options.fit = fit_options_from_json(j.at("options").at("fit"));
  st.options.acq = acq_options_from_json(j.at("options").at("acquisition"));
  st.options.max_nugget = j.at("options").value("max_nugget", 1e-2);
  st.mode = j.at("mode").get<std::string>() == "sequential" ? RunMode::sequential : RunMode::batch;
  st.batch_size = j.value("batch_size", 1);
  st.n_init = j.at("n_init").get<int>();
  st.n_adaptive = j.at("n_adaptive").get<int>();
  st.seed = j.at("seed").get<std::uint64_t>();
  st.event_counter = j.at("event_counter").get<std::uint64_t>();
  st.generation = j.value("generation", 0);

  for (const auto& e : j.value("observations", Json::array())) {
    Observation o;
    o.config = config_from_json(st.space, e.at("config"));
    o.y = num_from(e.at("y"));
    o.iteration = e.at("iteration").get<int>();
    o.source = e.value("source", "");
    o.ok = e.value("ok", std::isfinite(o.y));
    st.observations.push_back(std::move(o));
  }
  for (const auto& b : j.value("best_so_far", Json::array())) st.best_so_far.push_back(num_from(b));
  for (const auto& e : j.value("pending", Json::array())) {
    PendingItem p;
    p.token = e.at("token").get<std::string>();
    p.config = config_from_json(st.space, e.at("config"));
    p.source = e.value("source", "");
    if (e.value("told", false)) p.result = num_from(e.at("result"));
    st.pending.push_back(std::move(p));
  }
  if (j.contains("last_fit") && !j.at("last_fit").is_null()) {
    st.last_params = kernel_params_from_json(j.at("last_fit").at("params"));
    st.last_noise_ratio = j.at("last_fit").value("noise_ratio", 1e-6);
  }
  return st;
}

StudyState load_study(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open study file '" + path + "'");
  Json j = Json::parse(in);
  return study_from_json(j);
}

void save_study(const std::string& path, const StudyState& st) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << study_to_json(st).dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

StudyLock::StudyLock(const std::string& study_path) : lock_path_(study_path + ".lock") {
  std::FILE* f = std::fopen(lock_path_.c_str(), "wx");
  if (f == nullptr)
    throw ProtocolError("study '" + study_path + "' is locked (remove '" + lock_path_ +
                        "' if no other process is using it)");
  std::fclose(f);
}

StudyLock::~StudyLock() { std::remove(lock_path_.c_str()); }

}  // namespace bnopt
