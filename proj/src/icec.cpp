#include "ecselect/icec.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ecselect/error.hpp"

namespace ecselect {

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::kTo:
      return "to";
    case Direction::kFrom:
      return "from";
    case Direction::kBoth:
      return "both";
  }
  return "to";
}

Direction parse_direction(const std::string& name) {
  if (name == "to") return Direction::kTo;
  if (name == "from") return Direction::kFrom;
  if (name == "both") return Direction::kBoth;
  throw ConfigError("direction must be one of to|from|both, got '" + name + "'");
}

BandWindow full_time_band(const BandSpec& band, const ConnectivityTensor& tensor) {
  if (tensor.n_windows == 0) throw ConfigError("tensor has no windows");
  return {band.name, band.f_low, band.f_high, 0, tensor.n_windows - 1};
}

CollapsedMatrix collapse(const ConnectivityTensor& tensor, const BandWindow& bw) {
  if (bw.f_min > bw.f_max) throw ConfigError("band f_min exceeds f_max");
  if (bw.w_min > bw.w_max || bw.w_max >= tensor.n_windows) {
    throw ConfigError("window range outside tensor");
  }
  constexpr double kTol = 1e-9;
  std::vector<std::size_t> bins;
  for (std::size_t f = 0; f < tensor.n_freqs; ++f) {
    const double hz = tensor.grid.freqs[f];
    if (hz >= bw.f_min - kTol && hz <= bw.f_max + kTol) bins.push_back(f);
  }
  if (bins.empty()) {
    throw ConfigError("band '" + bw.name + "' contains no grid frequency");
  }
  std::vector<std::size_t> windows;
  for (std::size_t w = bw.w_min; w <= bw.w_max; ++w) {
    if (tensor.valid_windows[w]) windows.push_back(w);
  }
  if (windows.empty()) throw NumericalError("no valid window inside the requested range");

  const std::size_t k = tensor.n_channels;
  const double count = static_cast<double>(bins.size() * windows.size());
  CollapsedMatrix out{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                            static_cast<Eigen::Index>(k))};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double sum = 0.0;
      for (std::size_t f : bins) {
        for (std::size_t w : windows) sum += tensor.at(i, j, f, w);
      }
      out.c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum / count;
    }
  }
  return out;
}

std::size_t top_count(std::size_t n_channels, double top_fraction) {
  if (!(top_fraction > 0.0) || top_fraction > 1.0) {
    throw ConfigError("top_fraction must be in (0, 1]");
  }
  const double exact = top_fraction * static_cast<double>(n_channels - 1);
  // Guard the ceiling against representation error (0.3 * 10 = 3.0000000000000004).
  const auto n = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::clamp<std::size_t>(n, 1, n_channels - 1);
}

IcecReport icec(const CollapsedMatrix& c, double top_fraction, Direction direction) {
  const auto k = static_cast<std::size_t>(c.c.rows());
  if (k < 2 || c.c.cols() != c.c.rows()) throw ConfigError("ICEC needs a square matrix, K >= 2");
  if (!c.c.allFinite()) throw NumericalError("collapsed matrix has non-finite entries");
  const std::size_t take = top_count(k, top_fraction);

  Eigen::MatrixXd m = c.c;
  m.diagonal().setZero();
  if (direction == Direction::kFrom) m.transposeInPlace();
  if (direction == Direction::kBoth) m = (m + m.transpose()).eval();

  IcecReport report;
  report.top_fraction = top_fraction;
  report.direction = direction;
  report.raw.resize(k);
  std::vector<double> incident;
  for (std::size_t j = 0; j < k; ++j) {
    incident.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (i != j) incident.push_back(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    std::partial_sort(incident.begin(), incident.begin() + static_cast<std::ptrdiff_t>(take),
                      incident.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t n = 0; n < take; ++n) sum += incident[n];
    report.raw[j] = sum;
  }

  const double top = *std::max_element(report.raw.begin(), report.raw.end());
  report.normalized.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    report.normalized[j] = top > 0.0 ? report.raw[j] / top : 0.0;
  }
  report.ranking.resize(k);
  std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return report.normalized[a] > report.normalized[b];
                   });
  return report;
}

SelectionResult select_channels(const IcecReport& report, std::size_t k) {
  if (k < 1 || k > report.ranking.size()) {
    throw ConfigError("k must be in [1, " + std::to_string(report.ranking.size()) + "], got " +
                      std::to_string(k));
  }
  return {k, {report.ranking.begin(), report.ranking.begin() + static_cast<std::ptrdiff_t>(k)}};
}

const std::vector<BandSpec>& band_presets() {
  static const std::vector<BandSpec> kPresets = {
      {4.0, 7.0, "theta"},      {8.0, 12.0, "mu"},    {13.0, 15.0, "low-beta"},
      {18.0, 30.0, "high-beta"}, {29.0, 40.0, "gamma"}, {8.0, 30.0, "broad"},
      {1.0, 40.0, "full"},
  };
  return kPresets;
}

BandSpec parse_band(const std::string& text) {
  for (const BandSpec& b : band_presets()) {
    if (b.name == text) return b;
  }
  const auto dash = text.find('-');
  if (dash != std::string::npos && dash > 0) {
    try {
      std::size_t used_lo = 0;
      std::size_t used_hi = 0;
      const double lo = std::stod(text.substr(0, dash), &used_lo);
      const double hi = std::stod(text.substr(dash + 1), &used_hi);
      if (used_lo == dash && used_hi == text.size() - dash - 1 && lo < hi) {
        return {lo, hi, text};
      }
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown band '" + text + "' (use a preset name or \"lo-hi\")");
}

nlohmann::json to_json(const IcecReport& report) {
  nlohmann::json j;
  j["metric"] = report.metric;
  j["band"] = {{"name", report.band.name}, {"f_min", report.band.f_min},
               {"f_max", report.band.f_max}};
  j["top_fraction"] = report.top_fraction;
  j["direction"] = direction_name(report.direction);
  std::vector<std::size_t> rank(report.raw.size());
  for (std::size_t r = 0; r < report.ranking.size(); ++r) rank[report.ranking[r]] = r + 1;
  nlohmann::json channels = nlohmann::json::array();
  for (std::size_t i = 0; i < report.raw.size(); ++i) {
    const std::string name =
        i < report.channel_names.size() ? report.channel_names[i] : "ch" + std::to_string(i);
    channels.push_back({{"index", i},
                        {"name", name},
                        {"raw", report.raw[i]},
                        {"normalized", report.normalized[i]},
                        {"rank", rank[i]}});
  }
  j["channels"] = std::move(channels);
  return j;
}

IcecReport icec_report_from_json(const nlohmann::json& j) {
  IcecReport r;
  try {
    r.metric = j.at("metric").get<std::string>();
    r.band.name = j.at("band").at("name").get<std::string>();
    r.band.f_min = j.at("band").at("f_min").get<double>();
    r.band.f_max = j.at("band").at("f_max").get<double>();
    r.top_fraction = j.at("top_fraction").get<double>();
    r.direction = parse_direction(j.at("direction").get<std::string>());
    const auto& channels = j.at("channels");
    const std::size_t k = channels.size();
    r.raw.resize(k);
    r.normalized.resize(k);
    r.channel_names.resize(k);
    r.ranking.assign(k, k);
    for (const auto& c : channels) {
      const auto idx = c.at("index").get<std::size_t>();
      const auto rank = c.at("rank").get<std::size_t>();
      if (idx >= k || rank < 1 || rank > k) throw FormatError("ICEC report index out of range");
      r.raw[idx] = c.at("raw").get<double>();
      r.normalized[idx] = c.at("normalized").get<double>();
      r.channel_names[idx] = c.at("name").get<std::string>();
      r.ranking[rank - 1] = idx;
    }
    for (std::size_t v : r.ranking) {
      if (v >= k) throw FormatError("ICEC report ranks are not a permutation");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed ICEC report: ") + e.what());
  }
  return r;
}

}  // namespace ecselect
