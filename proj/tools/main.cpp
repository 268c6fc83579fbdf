#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "ecselect/error.hpp"
#include "run_config.hpp"

namespace {

using ecselect::cli::RunConfig;

std::vector<std::string> without_empty(std::vector<std::string> v) {
  std::erase(v, std::string());
  return v;
}

bool given(const std::vector<CLI::Option*>& opts) {
  for (const CLI::Option* o : opts) {
    if (o->count() > 0) return true;
  }
  return false;
}

// Flags that override config fields; only those given on the command line apply.
struct Overrides {
  std::string config_path;
  std::optional<std::string> train, test, out, direction, dataset_id;
  // Lists are applied whenever the flag appears, so an empty value stays empty.
  std::vector<std::string> metrics, bands;
  std::vector<int> orders;
  std::vector<std::size_t> ks;
  // One entry per subcommand the overrides are attached to.
  std::vector<CLI::Option*> metrics_opt, bands_opt, orders_opt, ks_opt;
  std::optional<double> window, step, top_fraction, svm_c, svm_gamma;
  std::optional<int> pairs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool print_config = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON run configuration");
    app->add_option("--train", train, "training epochs (EEGB or CSV)");
    app->add_option("--test", test, "test epochs (EEGB or CSV)");
    app->add_option("-o,--out", out, "output directory");
    app->add_option("--dataset-id", dataset_id, "dataset id recorded in reports");
    metrics_opt.push_back(app->add_option("--metrics", metrics, "metric list (dtf,ffdtf,ddtf,pdc,gpdc,rpdc)")
                      ->delimiter(',')
                      ->expected(0, 1 << 20));
    bands_opt.push_back(app->add_option("--bands", bands, "band presets or lo-hi ranges")
                    ->delimiter(',')
                    ->expected(0, 1 << 20));
    orders_opt.push_back(
        app->add_option("--orders", orders, "candidate model orders")->delimiter(','));
    ks_opt.push_back(app->add_option("--ks", ks, "channel counts to evaluate")->delimiter(','));
    app->add_option("--window", window, "window length in seconds");
    app->add_option("--step", step, "window step in seconds");
    app->add_option("--top-fraction", top_fraction, "ICEC top fraction");
    app->add_option("--direction", direction, "ICEC direction: to|from|both");
    app->add_option("--pairs", pairs, "CSP filter pairs per class");
    app->add_option("--svm-c", svm_c, "SVM penalty");
    app->add_option("--svm-gamma", svm_gamma, "RBF kernel width");
    app->add_option("--seed", seed, "seed");
    app->add_option("--threads", threads, "worker threads (0 = hardware)");
    app->add_flag("--print-config", print_config, "print the resolved config and exit");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : ecselect::cli::load_run_config(config_path);
    if (train) c.train = *train;
    if (test) c.test = *test;
    if (out) c.output_dir = *out;
    if (dataset_id) c.dataset_id = *dataset_id;
    if (given(metrics_opt)) c.metrics = without_empty(metrics);
    if (given(bands_opt)) c.bands = without_empty(bands);
    if (given(orders_opt)) c.orders = orders;
    if (given(ks_opt)) c.ks = ks;
    if (window) c.window_length_s = *window;
    if (step) c.step_s = *step;
    if (top_fraction) c.top_fraction = *top_fraction;
    if (direction) c.direction = *direction;
    if (pairs) c.csp_pairs = *pairs;
    if (svm_c) c.svm_c = *svm_c;
    if (svm_gamma) c.svm_gamma = *svm_gamma;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    return c;
  }
};

int fail(int code, const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump()
            << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective-connectivity EEG channel selection"};
  app.require_subcommand(1);

  Overrides ov;
  std::string spec_path;
  std::string synth_out;
  std::string synth_test_out;
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  synth->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  synth->add_option("-o,--out", synth_out, "output epochs file")->required();
  synth->add_option("--test-out", synth_test_out, "test epochs file (labeled specs)");

  auto* conn = app.add_subcommand("connectivity", "fit windowed MVAR models, write tensors");
  auto* icec = app.add_subcommand("icec", "ICEC reports and topographies per metric and band");
  std::vector<std::string> tensor_paths;
  icec->add_option("--tensor", tensor_paths, "tensor files (default: <out>/connectivity)");
  auto* select = app.add_subcommand("select", "top-k channels from an ICEC report");
  std::string report_path;
  std::size_t k = 0;
  select->add_option("--report", report_path, "ICEC report JSON")->required();
  select->add_option("-k", k, "number of channels")->required();
  auto* evaluate = app.add_subcommand("evaluate", "CSP + SVM accuracy over selections");
  std::vector<std::string> report_paths;
  evaluate->add_option("--report", report_paths, "ICEC reports (default: <out>/icec)");
  auto* report = app.add_subcommand("report", "summarize an evaluation");
  for (auto* sub : {conn, icec, evaluate, report}) ov.attach(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "config", e.what());
  }

  try {
    if (synth->parsed()) {
      ecselect::cli::cmd_synth(spec_path, synth_out, synth_test_out);
      return 0;
    }
    if (select->parsed()) {
      std::cout << ecselect::cli::cmd_select(report_path, k).dump(2) << "\n";
      return 0;
    }
    const RunConfig config = ov.resolve();
    if (ov.print_config) {
      config.validate();
      std::cout << ecselect::cli::to_json(config).dump(2) << "\n";
      return 0;
    }
    if (conn->parsed()) ecselect::cli::cmd_connectivity(config);
    if (icec->parsed()) ecselect::cli::cmd_icec(config, tensor_paths);
    if (evaluate->parsed()) ecselect::cli::cmd_evaluate(config, report_paths);
    if (report->parsed()) std::cout << ecselect::cli::cmd_report(config).dump(2) << "\n";
    return 0;
  } catch (const ecselect::Error& e) {
    return fail(static_cast<int>(e.kind()), ecselect::to_string(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(3, "format", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
}
