#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnopt/bench.hpp"
#include "bnopt/search_space.hpp"
#include "bnopt/study.hpp"

namespace bnopt {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
  int line;
};

/// Everything a CLI run needs. Parsed from a sectioned tree file
/// ([space] / [objective] / [run] / [fit] / [acquisition] / [benchmark]) or
/// from the equivalent JSON document; the format is sniffed from the first
/// non-space character.
struct RunConfig {
  std::optional<SearchSpace> space;  // defaults to the builtin objective's space
  ObjectiveSpec objective;
  RunMode mode = RunMode::sequential;
  int batch_size = 1;
  int n_init = 10;
  int n_adaptive = 50;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  StudyOptions options;

  std::vector<BenchMethod> bench_methods;
  int replicates = 20;

  /// The declared space, or the builtin objective's canonical one.
  SearchSpace resolved_space() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace bnopt
