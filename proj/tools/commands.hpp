#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "run_config.hpp"

namespace ecselect::cli {

/// Writes a {"warning": ...} line to stderr.
void warn(const std::string& message);

/// Spec JSON: {"kind": "var", <ground-truth fields>, n_trials, n_samples, burn_in}
/// or {"kind": "labeled", <labeled dataset fields>, test_seed?}. A labeled spec also
/// writes a test set to `test_out` when given.
void cmd_synth(const std::string& spec_path, const std::string& out, const std::string& test_out);

/// <output_dir>/connectivity/<metric>.ect plus manifest.json.
void cmd_connectivity(const RunConfig& config);

/// <output_dir>/icec/<metric>_<band>.json and .svg for every tensor x band. With no
/// explicit tensor paths, reads the configured metrics from <output_dir>/connectivity.
std::vector<std::string> cmd_icec(const RunConfig& config,
                                  const std::vector<std::string>& tensor_paths);

nlohmann::json cmd_select(const std::string& report_path, std::size_t k);

/// <output_dir>/evaluation.json and evaluation.csv.
void cmd_evaluate(const RunConfig& config, const std::vector<std::string>& report_paths);

/// Summary of <output_dir>/evaluation.json; also writes summary.json and curves.csv.
nlohmann::json cmd_report(const RunConfig& config);

}  // namespace ecselect::cli
