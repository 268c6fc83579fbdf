#include "run_config.hpp"

#include <fstream>
#include <set>

#include "ecselect/error.hpp"
#include "ecselect/icec.hpp"
#include "ecselect/spectral.hpp"

namespace ecselect::cli {

namespace {

nlohmann::json filter_json(const FilterConfig& f) {
  return {{"f_low", f.f_low}, {"f_high", f.f_high}, {"order", f.order}};
}

FilterConfig filter_from_json(const nlohmann::json& j, FilterConfig f) {
  f.f_low = j.value("f_low", f.f_low);
  f.f_high = j.value("f_high", f.f_high);
  f.order = j.value("order", f.order);
  return f;
}

}  // namespace

void RunConfig::validate() const {
  if (metrics.empty()) throw ConfigError("metrics: list is empty");
  for (const auto& m : metrics) parse_metric(m);
  if (bands.empty()) throw ConfigError("bands: list is empty");
  for (const auto& b : bands) parse_band(b);
  if (orders.empty()) throw ConfigError("orders: list is empty");
  for (int p : orders) {
    if (p < 1) throw ConfigError("orders: every candidate must be >= 1");
  }
  if (!(window_length_s > 0.0)) throw ConfigError("window_length_s must be positive");
  if (!(step_s > 0.0)) throw ConfigError("step_s must be positive");
  if (!(grid_step > 0.0) || !(grid_f_min > 0.0) || grid_f_max < grid_f_min) {
    throw ConfigError("frequency grid: need 0 < f_min <= f_max and step > 0");
  }
  if (!(top_fraction > 0.0) || top_fraction > 1.0) throw ConfigError("top_fraction must be in (0, 1]");
  parse_direction(direction);
  if (csp_pairs < 1) throw ConfigError("csp_pairs must be >= 1");
  if (!(svm_c > 0.0)) throw ConfigError("svm.c must be positive");
  if (svm_gamma && !(*svm_gamma > 0.0)) throw ConfigError("svm.gamma must be positive");
  for (std::size_t k : ks) {
    if (k < 1) throw ConfigError("ks: every k must be >= 1");
  }
  if (order_windows < 1) throw ConfigError("order_windows must be >= 1");
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json svm = {{"c", c.svm_c}, {"gamma", nullptr}};
  if (c.svm_gamma) svm["gamma"] = *c.svm_gamma;
  return {{"train", c.train},
          {"test", c.test},
          {"output_dir", c.output_dir},
          {"dataset_id", c.dataset_id},
          {"metrics", c.metrics},
          {"bands", c.bands},
          {"orders", c.orders},
          {"order_windows", c.order_windows},
          {"window_length_s", c.window_length_s},
          {"step_s", c.step_s},
          {"grid", {{"f_min", c.grid_f_min}, {"f_max", c.grid_f_max}, {"step", c.grid_step}}},
          {"preprocess", filter_json(c.preprocess)},
          {"eval_filter", filter_json(c.eval_filter)},
          {"top_fraction", c.top_fraction},
          {"direction", c.direction},
          {"ks", c.ks},
          {"csp_pairs", c.csp_pairs},
          {"svm", svm},
          {"seed", c.seed},
          {"threads", c.threads},
          {"whiteness_max_lag", c.whiteness_max_lag}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKnown = {
      "train",     "test",         "output_dir", "dataset_id",   "metrics",  "bands",
      "orders",    "order_windows", "window_length_s", "step_s", "grid",     "preprocess",
      "eval_filter", "top_fraction", "direction", "ks",          "csp_pairs", "svm",
      "seed",      "threads",      "whiteness_max_lag"};
  for (const auto& item : j.items()) {
    if (!kKnown.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }
  RunConfig c;
  try {
    c.train = j.value("train", c.train);
    c.test = j.value("test", c.test);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.dataset_id = j.value("dataset_id", c.dataset_id);
    c.metrics = j.value("metrics", c.metrics);
    c.bands = j.value("bands", c.bands);
    c.orders = j.value("orders", c.orders);
    c.order_windows = j.value("order_windows", c.order_windows);
    c.window_length_s = j.value("window_length_s", c.window_length_s);
    c.step_s = j.value("step_s", c.step_s);
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid_f_min = g.value("f_min", c.grid_f_min);
      c.grid_f_max = g.value("f_max", c.grid_f_max);
      c.grid_step = g.value("step", c.grid_step);
    }
    if (j.contains("preprocess")) c.preprocess = filter_from_json(j["preprocess"], c.preprocess);
    if (j.contains("eval_filter")) c.eval_filter = filter_from_json(j["eval_filter"], c.eval_filter);
    c.top_fraction = j.value("top_fraction", c.top_fraction);
    c.direction = j.value("direction", c.direction);
    c.ks = j.value("ks", c.ks);
    c.csp_pairs = j.value("csp_pairs", c.csp_pairs);
    if (j.contains("svm")) {
      const auto& s = j["svm"];
      c.svm_c = s.value("c", c.svm_c);
      if (s.contains("gamma") && !s["gamma"].is_null()) c.svm_gamma = s["gamma"].get<double>();
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.whiteness_max_lag = j.value("whiteness_max_lag", c.whiteness_max_lag);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace ecselect::cli
