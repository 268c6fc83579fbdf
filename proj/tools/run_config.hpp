#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ecselect::cli {

struct FilterConfig {
  double f_low = 1.0;
  double f_high = 40.0;
  int order = 5;
};

struct RunConfig {
  std::string train;
  std::string test;
  std::string output_dir = "out";
  std::string dataset_id = "dataset";
  std::vector<std::string> metrics{"dtf", "ddtf", "pdc", "gpdc", "rpdc"};
  std::vector<std::string> bands{"theta", "mu", "low-beta", "high-beta", "gamma", "broad", "full"};
  std::vector<int> orders{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Evenly spaced windows averaged for the AIC scan.
  std::size_t order_windows = 8;
  double window_length_s = 0.5;
  double step_s = 0.03;
  double grid_f_min = 1.0;
  double grid_f_max = 40.0;
  double grid_step = 1.0;
  FilterConfig preprocess{1.0, 40.0, 5};
  FilterConfig eval_filter{8.0, 30.0, 3};
  double top_fraction = 0.3;
  std::string direction = "to";
  /// Empty means 2..K.
  std::vector<std::size_t> ks;
  int csp_pairs = 3;
  double svm_c = 1.0;
  std::optional<double> svm_gamma;
  std::uint64_t seed = 0;
  /// 0 = hardware concurrency; ECSELECT_THREADS still caps it.
  std::size_t threads = 0;
  int whiteness_max_lag = 20;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys are rejected so typos do not silently fall back to defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

}  // namespace ecselect::cli
