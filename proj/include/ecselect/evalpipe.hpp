#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "ecselect/icec.hpp"
#include "ecselect/signal.hpp"
#include "ecselect/svm.hpp"

namespace ecselect {

struct EvalOptions {
  std::string dataset_id = "dataset";
  std::vector<std::size_t> ks;
  int n_pairs = 3;
  SvmOptions svm;
  BandSpec band{8.0, 30.0, "eval"};
  int filter_order = 3;
};

struct EvalCell {
  std::string metric;
  std::string band;
  std::size_t k = 0;
  std::vector<std::size_t> channels;
  std::vector<std::string> channel_names;
  /// NaN when the cell failed; see `error`.
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::vector<std::string> flags;
  std::string error;
};

struct EvaluationReport {
  std::string dataset_id;
  std::vector<EvalCell> cells;
};

/// CSP + SVM accuracy on already filtered data restricted to `channels`.
EvalCell evaluate_channels(const EpochSet& train_filtered, const EpochSet& test_filtered,
                           const std::vector<std::size_t>& channels, const EvalOptions& options);

/// Band-passes both sets once, then sweeps every (report, k) cell in parallel.
/// Cell failures are recorded and the sweep continues.
EvaluationReport evaluate_selection(const EpochSet& train, const EpochSet& test,
                                    const std::vector<IcecReport>& reports,
                                    const EvalOptions& options);

/// Accuracy with every channel, no selection.
EvalCell evaluate_baseline(const EpochSet& train, const EpochSet& test,
                           const EvalOptions& options);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport evaluation_report_from_json(const nlohmann::json& j);
/// metric,band,k,train_acc,test_acc,channels,flags
std::string to_csv(const EvaluationReport& report);

}  // namespace ecselect
