#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "bnopt/gp.hpp"
#include "bnopt/search_space.hpp"
#include "bnopt/study.hpp"

namespace bnopt {

using Json = nlohmann::json;

Json space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const Json& j);

/// Flat key -> value record; inactive nested variables are simply absent.
Json config_to_json(const Configuration& cfg);
Configuration config_from_json(const SearchSpace& space, const Json& j);

Json kernel_params_to_json(const KernelParams& p);
KernelParams kernel_params_from_json(const Json& j);

Json fit_options_to_json(const FitOptions& o);
FitOptions fit_options_from_json(const Json& j);

Json acq_options_to_json(const AcqOptions& o);
AcqOptions acq_options_from_json(const Json& j);

/// Fitted-model snapshot: hyperparameter estimates plus scalar estimates;
/// the dataset stays with the study and the factorization is recomputed on
/// load.
Json gp_to_json(const TrainedGP& gp);
TrainedGP gp_from_json(const SearchSpace& space, const Dataset& data, const Json& j);

Json study_to_json(const StudyState& st);
StudyState study_from_json(const Json& j);

StudyState load_study(const std::string& path);
/// Write-temp-then-rename so a crashed writer never corrupts the study.
void save_study(const std::string& path, const StudyState& st);

/// Advisory lock guarding a study file; throws ProtocolError when another
/// process holds it.
class StudyLock {
 public:
  explicit StudyLock(const std::string& study_path);
  ~StudyLock();
  StudyLock(const StudyLock&) = delete;
  StudyLock& operator=(const StudyLock&) = delete;

 private:
  std::string lock_path_;
};

}  // namespace bnopt
