#include "ecselect/evalpipe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ecselect/csp.hpp"
#include "ecselect/error.hpp"
#include "ecselect/parallel.hpp"

namespace ecselect {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_labels(const EpochSet& train, const EpochSet& test) {
  if (!train.has_labels() || !test.has_labels()) {
    throw ConfigError("evaluate requires labeled train and test epochs");
  }
  if (train.channel_names() != test.channel_names() || train.fs() != test.fs()) {
    throw ConfigError("train and test epochs must share channels and fs");
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

EvalCell evaluate_channels(const EpochSet& train_filtered, const EpochSet& test_filtered,
                           const std::vector<std::size_t>& channels, const EvalOptions& options) {
  EvalCell cell;
  cell.k = channels.size();
  cell.channels = channels;
  const auto names = train_filtered.channel_names();
  for (std::size_t c : channels) {
    if (c >= names.size()) throw ConfigError("selected channel out of range");
    cell.channel_names.push_back(names[c]);
  }
  if (channels.size() < 2) {
    throw ConfigError("CSP needs at least 2 channels, got k = " + std::to_string(channels.size()));
  }
  const EpochSet train = select_channel_subset(train_filtered, channels);
  const EpochSet test = select_channel_subset(test_filtered, channels);

  int m = options.n_pairs;
  if (2 * m > static_cast<int>(channels.size())) {
    m = static_cast<int>(channels.size()) / 2;
    cell.flags.push_back("n_pairs_clamped");
  }
  const MulticlassCsp csp = csp_fit_multiclass(train, m);
  FeatureMatrix f_train{csp_features(csp, train), *train.labels()};
  FeatureMatrix f_test{csp_features(csp, test), *test.labels()};
  for (const CspModel& model : csp.models) {
    if (model.regularized) {
      cell.flags.push_back("csp_regularized");
      break;
    }
  }
  const SvmModel svm = svm_train(f_train.features, f_train.labels, options.svm);
  if (!svm.converged) cell.flags.push_back("svm_not_converged");
  cell.train_acc = accuracy(svm_predict(svm, f_train.features), f_train.labels);
  cell.test_acc = accuracy(svm_predict(svm, f_test.features), f_test.labels);
  return cell;
}

EvalCell evaluate_baseline(const EpochSet& train, const EpochSet& test,
                           const EvalOptions& options) {
  require_labels(train, test);
  const EpochSet tr = bandpass_filter(train, options.band, options.filter_order);
  const EpochSet te = bandpass_filter(test, options.band, options.filter_order);
  std::vector<std::size_t> all(train.n_channels());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  EvalCell cell = evaluate_channels(tr, te, all, options);
  cell.metric = "none";
  cell.band = "none";
  return cell;
}

EvaluationReport evaluate_selection(const EpochSet& train, const EpochSet& test,
                                    const std::vector<IcecReport>& reports,
                                    const EvalOptions& options) {
  require_labels(train, test);
  if (reports.empty()) throw ConfigError("evaluate needs at least one ICEC report");
  std::vector<std::size_t> ks = options.ks;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) throw ConfigError("evaluate needs a non-empty k list");

  const EpochSet tr = bandpass_filter(train, options.band, options.filter_order);
  const EpochSet te = bandpass_filter(test, options.band, options.filter_order);

  EvaluationReport out;
  out.dataset_id = options.dataset_id;
  out.cells.resize(reports.size() * ks.size());
  parallel_for(out.cells.size(), [&](std::size_t idx) {
    const IcecReport& report = reports[idx / ks.size()];
    const std::size_t k = ks[idx % ks.size()];
    EvalCell cell;
    try {
      if (report.ranking.size() != train.n_channels()) {
        throw ConfigError("ICEC report has " + std::to_string(report.ranking.size()) +
                          " channels, data has " + std::to_string(train.n_channels()));
      }
      cell = evaluate_channels(tr, te, select_channels(report, k).selected, options);
    } catch (const std::exception& e) {
      cell = EvalCell{};
      cell.k = k;
      cell.train_acc = kNaN;
      cell.test_acc = kNaN;
      cell.error = e.what();
      cell.flags.push_back("error");
    }
    cell.metric = report.metric;
    cell.band = report.band.name;
    out.cells[idx] = std::move(cell);
  });
  return out;
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  for (const EvalCell& c : report.cells) {
    nlohmann::json j = {{"metric", c.metric},
                        {"band", c.band},
                        {"k", c.k},
                        {"channels", c.channels},
                        {"channel_names", c.channel_names},
                        {"train_acc", num(c.train_acc)},
                        {"test_acc", num(c.test_acc)},
                        {"flags", c.flags}};
    if (!c.error.empty()) j["error"] = c.error;
    cells.push_back(std::move(j));
  }
  return {{"dataset_id", report.dataset_id}, {"cells", std::move(cells)}};
}

EvaluationReport evaluation_report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  try {
    r.dataset_id = j.at("dataset_id").get<std::string>();
    for (const auto& c : j.at("cells")) {
      EvalCell cell;
      cell.metric = c.at("metric").get<std::string>();
      cell.band = c.at("band").get<std::string>();
      cell.k = c.at("k").get<std::size_t>();
      cell.channels = c.at("channels").get<std::vector<std::size_t>>();
      cell.channel_names = c.value("channel_names", std::vector<std::string>{});
      cell.train_acc = c.at("train_acc").is_null() ? kNaN : c.at("train_acc").get<double>();
      cell.test_acc = c.at("test_acc").is_null() ? kNaN : c.at("test_acc").get<double>();
      cell.flags = c.at("flags").get<std::vector<std::string>>();
      cell.error = c.value("error", std::string{});
      r.cells.push_back(std::move(cell));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string to_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "metric,band,k,train_acc,test_acc,channels,flags\n";
  for (const EvalCell& c : report.cells) {
    out << c.metric << ',' << c.band << ',' << c.k << ',' << format_double(c.train_acc) << ','
        << format_double(c.test_acc) << ',';
    for (std::size_t i = 0; i < c.channels.size(); ++i) out << (i ? ";" : "") << c.channels[i];
    out << ',';
    for (std::size_t i = 0; i < c.flags.size(); ++i) out << (i ? ";" : "") << c.flags[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace ecselect
