#pragma once

#include <string>
#include <vector>

#include "fofr/simgen.hpp"

namespace fofr {

/// Declarative study description (JSON). Keys outside the schema are
/// rejected before any computation; the FOFR_SEED environment variable
/// overrides the configured seed.
struct StudyConfig {
  Scenario scenario;

  // truncations
  bool k_loocv = true;
  int k = 0;  // used when !k_loocv
  int k_max = 10;
  bool g_equals_k = true;
  int g = 0;  // used when !g_equals_k
  bool has_h = false;
  int h = 0;                   // explicit estimation truncation
  std::vector<int> deltas{0};  // h = k + delta when h is not explicit

  // bootstrap
  int B = 1000;
  std::uint64_t seed = 0;

  // inference targets
  std::string proj_spec = "cubic";  // "cubic" | "constant" | CSV path
  std::vector<double> eval_ts{0.9};
  double level = 0.95;

  // study
  int M = 0;
  std::vector<int> n_list;
  std::string out;
  int threads = 0;
};

StudyConfig parse_study_config(const std::string& json_text,
                               const std::string& name);

/// Reads, validates, and applies the FOFR_SEED override.
StudyConfig load_study_config(const std::string& path);

/// Resolves a projection spec to a curve on the grid: the smooth cubic
/// 10t^3 - 15t^4 + 6t^5, the constant one, or the single row of a CSV file.
Fn resolve_projection(const std::string& spec, const GridPtr& grid);

}  // namespace fofr
