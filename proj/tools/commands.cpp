#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ecselect/error.hpp"
#include "ecselect/evalpipe.hpp"
#include "ecselect/icec.hpp"
#include "ecselect/mvar.hpp"
#include "ecselect/parallel.hpp"
#include "ecselect/signal.hpp"
#include "ecselect/spectral.hpp"
#include "ecselect/synth.hpp"
#include "ecselect/topography.hpp"

namespace ecselect::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

EpochSet load(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " input path is not set");
  return load_epochs(path, format_from_path(path));
}

void apply_threads(const RunConfig& config) { set_worker_limit(config.threads); }

std::string report_stem(const std::string& metric, const std::string& band) {
  return metric + "_" + band;
}

}  // namespace

void warn(const std::string& message) {
  std::cerr << json{{"warning", message}}.dump() << "\n";
}

void cmd_synth(const std::string& spec_path, const std::string& out, const std::string& test_out) {
  if (out.empty()) throw ConfigError("synth needs an output path");
  const json spec = [&] {
    try {
      return read_json(spec_path);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!spec.is_object()) throw ConfigError("synth spec must be a JSON object");
  const std::string kind = spec.value("kind", std::string("var"));
  json fields = spec;
  fields.erase("kind");
  if (kind == "var") {
    std::size_t n_trials = 0;
    std::size_t n_samples = 0;
    std::size_t burn_in = 0;
    try {
      n_trials = fields.value("n_trials", std::size_t{10});
      n_samples = fields.value("n_samples", std::size_t{500});
      burn_in = fields.value("burn_in", std::size_t{0});
    } catch (const json::exception& e) {
      throw ConfigError(std::string("synth spec: ") + e.what());
    }
    for (const char* key : {"n_trials", "n_samples", "burn_in"}) fields.erase(key);
    const GroundTruthSpec gt = ground_truth_from_json(fields);
    if (burn_in == 0) burn_in = 10 * static_cast<std::size_t>(gt.order) + 100;
    const EpochSet epochs = gen_var_epochs(gt, n_trials, n_samples, burn_in);
    save_epochs(epochs, out, format_from_path(out));
    if (!test_out.empty()) warn("test output is only produced by labeled specs; ignored");
  } else if (kind == "labeled") {
    std::uint64_t test_seed = 0;
    LabeledDatasetSpec ls = labeled_spec_from_json(fields);
    try {
      test_seed = fields.value("test_seed", ls.seed + 1);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("synth spec: ") + e.what());
    }
    save_epochs(gen_labeled_csp_dataset(ls), out, format_from_path(out));
    if (!test_out.empty()) {
      ls.seed = test_seed;
      save_epochs(gen_labeled_csp_dataset(ls), test_out, format_from_path(test_out));
    }
  } else {
    throw ConfigError("synth spec kind must be \"var\" or \"labeled\", got '" + kind + "'");
  }
}

void cmd_connectivity(const RunConfig& config) {
  config.validate();
  apply_threads(config);
  std::vector<Metric> metrics;
  for (const auto& m : config.metrics) metrics.push_back(parse_metric(m));

  const EpochSet raw = load(config.train, "train");
  const BandSpec pre{config.preprocess.f_low, config.preprocess.f_high, "preprocess"};
  const EpochSet epochs = ensemble_normalize(bandpass_filter(raw, pre, config.preprocess.order));

  const std::size_t win = seconds_to_samples(config.window_length_s, epochs.fs());
  const std::size_t step = seconds_to_samples(config.step_s, epochs.fs());
  const OrderSelection sel =
      select_order_windowed(epochs, config.orders, win, step, config.order_windows);
  const WindowedVarModels windowed =
      fit_windowed(epochs, sel.chosen, config.window_length_s, config.step_s);
  const FrequencyGrid grid =
      FrequencyGrid::uniform(config.grid_f_min, config.grid_f_max, config.grid_step);
  std::vector<ConnectivityTensor> tensors = compute_connectivity(windowed, metrics, grid);

  const fs::path dir = fs::path(config.output_dir) / "connectivity";
  fs::create_directories(dir);
  json outputs = json::array();
  for (ConnectivityTensor& t : tensors) {
    t.channel_names = epochs.channel_names();
    const fs::path path = dir / (metric_name(t.metric) + ".ect");
    save_tensor(t, path);
    outputs.push_back({{"metric", metric_name(t.metric)},
                       {"file", path.filename().string()},
                       {"valid_windows", t.valid_count()}});
    if (t.valid_count() < t.n_windows) {
      warn(metric_name(t.metric) + ": " + std::to_string(t.n_windows - t.valid_count()) +
           " of " + std::to_string(t.n_windows) + " windows invalid");
    }
  }

  // Validation on evenly spaced valid windows.
  std::vector<std::size_t> valid_idx;
  for (std::size_t w = 0; w < windowed.models.size(); ++w) {
    if (windowed.valid[w]) valid_idx.push_back(w);
  }
  const std::size_t n_check = std::min(config.order_windows, valid_idx.size());
  json validation = json::array();
  std::vector<json> rows(n_check);
  parallel_for(n_check, [&](std::size_t i) {
    const std::size_t w = valid_idx[n_check == 1 ? 0 : i * (valid_idx.size() - 1) / (n_check - 1)];
    const std::size_t start = windowed.window_starts[w];
    json row = {{"window", w}, {"start", start}};
    try {
      const EpochSet seg = segment(epochs, start, start + windowed.window_samples);
      const int max_lag = std::max(config.whiteness_max_lag, sel.chosen + 1);
      const ValidationReport v =
          validate_model(windowed.models[w], seg, max_lag, config.seed + w);
      row["stable"] = v.stable;
      row["max_eigen_modulus"] = v.max_eigen_modulus;
      row["whiteness_pvalue"] = v.whiteness_pvalue;
      row["percent_consistency"] = v.percent_consistency;
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    rows[i] = std::move(row);
  });
  for (auto& r : rows) validation.push_back(std::move(r));

  json aic = json::array();
  for (std::size_t i = 0; i < sel.candidate_orders.size(); ++i) {
    aic.push_back({{"order", sel.candidate_orders[i]},
                   {"aic", sel.failed[i] ? json(nullptr) : json(sel.aic_values[i])}});
  }
  const json manifest = {{"input", config.train},
                         {"n_channels", epochs.n_channels()},
                         {"n_trials", epochs.n_trials()},
                         {"fs", epochs.fs()},
                         {"order_selection", {{"chosen", sel.chosen}, {"aic", aic}}},
                         {"window_samples", windowed.window_samples},
                         {"step_samples", windowed.step_samples},
                         {"n_windows", windowed.models.size()},
                         {"tensors", outputs},
                         {"validation", validation}};
  write_json(dir / "manifest.json", manifest);
}

std::vector<std::string> cmd_icec(const RunConfig& config,
                                  const std::vector<std::string>& tensor_paths) {
  config.validate();
  apply_threads(config);
  std::vector<std::string> paths = tensor_paths;
  if (paths.empty()) {
    for (const auto& m : config.metrics) {
      paths.push_back((fs::path(config.output_dir) / "connectivity" / (m + ".ect")).string());
    }
  }
  std::vector<BandSpec> bands;
  for (const auto& b : config.bands) bands.push_back(parse_band(b));
  const Direction direction = parse_direction(config.direction);

  std::vector<ConnectivityTensor> tensors;
  for (const auto& p : paths) tensors.push_back(load_tensor(p));

  const fs::path dir = fs::path(config.output_dir) / "icec";
  fs::create_directories(dir);
  const std::size_t n_jobs = tensors.size() * bands.size();
  std::vector<std::string> written(n_jobs);
  std::vector<std::string> warnings(n_jobs);
  parallel_for(n_jobs, [&](std::size_t idx) {
    const ConnectivityTensor& t = tensors[idx / bands.size()];
    const BandSpec& band = bands[idx % bands.size()];
    IcecReport report = icec(collapse(t, full_time_band(band, t)), config.top_fraction, direction);
    report.metric = metric_name(t.metric);
    report.band = full_time_band(band, t);
    std::vector<std::string> names = t.channel_names;
    if (names.empty()) {
      for (std::size_t c = 0; c < t.n_channels; ++c) names.push_back("ch" + std::to_string(c));
    }
    report.channel_names = names;
    const std::string stem = report_stem(report.metric, band.name);
    write_json(dir / (stem + ".json"), to_json(report));
    if (auto svg = topography_svg(report, make_channels(names))) {
      write_text(dir / (stem + ".svg"), *svg);
    } else {
      warnings[idx] = stem + ": channel positions unknown, topography skipped";
    }
    written[idx] = (dir / (stem + ".json")).string();
  });
  for (const auto& w : warnings) {
    if (!w.empty()) warn(w);
  }
  return written;
}

json cmd_select(const std::string& report_path, std::size_t k) {
  const IcecReport report = icec_report_from_json(read_json(report_path));
  const SelectionResult sel = select_channels(report, k);
  std::vector<std::string> names;
  for (std::size_t c : sel.selected) names.push_back(report.channel_names[c]);
  return {{"metric", report.metric},
          {"band", report.band.name},
          {"k", sel.k},
          {"channels", sel.selected},
          {"names", names}};
}

void cmd_evaluate(const RunConfig& config, const std::vector<std::string>& report_paths) {
  config.validate();
  apply_threads(config);
  const EpochSet train = load(config.train, "train");
  const EpochSet test = load(config.test, "test");
  if (!train.has_labels() || !test.has_labels()) {
    throw ConfigError("evaluate requires labeled train and test epochs");
  }
  std::vector<std::string> paths = report_paths;
  if (paths.empty()) {
    for (const auto& m : config.metrics) {
      for (const auto& b : config.bands) {
        paths.push_back(
            (fs::path(config.output_dir) / "icec" / (report_stem(m, parse_band(b).name) + ".json"))
                .string());
      }
    }
  }
  std::vector<IcecReport> reports;
  for (const auto& p : paths) reports.push_back(icec_report_from_json(read_json(p)));

  EvalOptions opts;
  opts.dataset_id = config.dataset_id;
  opts.ks = config.ks;
  if (opts.ks.empty()) {
    for (std::size_t k = 2; k <= train.n_channels(); ++k) opts.ks.push_back(k);
  }
  opts.n_pairs = config.csp_pairs;
  opts.svm.c = config.svm_c;
  opts.svm.gamma = config.svm_gamma;
  opts.band = {config.eval_filter.f_low, config.eval_filter.f_high, "eval"};
  opts.filter_order = config.eval_filter.order;

  EvaluationReport report = evaluate_selection(train, test, reports, opts);
  try {
    report.cells.push_back(evaluate_baseline(train, test, opts));
  } catch (const Error& e) {
    warn(std::string("baseline evaluation failed: ") + e.what());
  }
  std::size_t failed = 0;
  for (const auto& c : report.cells) failed += c.error.empty() ? 0 : 1;
  if (failed > 0) warn(std::to_string(failed) + " evaluation cells failed; see flags");
  write_json(fs::path(config.output_dir) / "evaluation.json", to_json(report));
  write_text(fs::path(config.output_dir) / "evaluation.csv", to_csv(report));
}

json cmd_report(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  const EvaluationReport report = evaluation_report_from_json(read_json(dir / "evaluation.json"));

  std::map<std::pair<std::string, std::string>, std::map<std::size_t, double>> curves;
  std::optional<EvalCell> baseline;
  for (const EvalCell& c : report.cells) {
    if (c.metric == "none") {
      baseline = c;
      continue;
    }
    if (c.error.empty()) curves[{c.metric, c.band}][c.k] = c.test_acc;
  }
  json combos = json::array();
  std::vector<std::size_t> all_k;
  for (const auto& [key, curve] : curves) {
    double best = -1.0;
    std::size_t best_k = 0;
    for (const auto& [k, acc] : curve) {
      all_k.push_back(k);
      if (acc > best) {
        best = acc;
        best_k = k;
      }
    }
    combos.push_back({{"metric", key.first},
                      {"band", key.second},
                      {"best_k", best_k},
                      {"best_test_acc", best}});
  }
  std::sort(all_k.begin(), all_k.end());
  all_k.erase(std::unique(all_k.begin(), all_k.end()), all_k.end());

  std::ostringstream csv;
  csv.precision(17);
  csv << "k";
  for (const auto& [key, curve] : curves) csv << ',' << key.first << '/' << key.second;
  csv << '\n';
  for (std::size_t k : all_k) {
    csv << k;
    for (const auto& [key, curve] : curves) {
      csv << ',';
      if (auto it = curve.find(k); it != curve.end()) csv << it->second;
    }
    csv << '\n';
  }
  json summary = {{"dataset_id", report.dataset_id}, {"combinations", combos}};
  summary["baseline_test_acc"] =
      baseline && baseline->error.empty() ? json(baseline->test_acc) : json(nullptr);
  write_json(dir / "summary.json", summary);
  write_text(dir / "curves.csv", csv.str());
  return summary;
}

}  // namespace ecselect::cli
