#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ecselect/signal.hpp"
#include "ecselect/spectral.hpp"

namespace ecselect {

/// Inclusive frequency bounds (Hz) and inclusive window-index bounds.
struct BandWindow {
  std::string name;
  double f_min = 0.0;
  double f_max = 0.0;
  std::size_t w_min = 0;
  std::size_t w_max = 0;
};

/// Band over every window of `tensor`.
BandWindow full_time_band(const BandSpec& band, const ConnectivityTensor& tensor);

/// C(i, j): mean connectivity to i from j; the diagonal is zero.
struct CollapsedMatrix {
  Eigen::MatrixXd c;
};

/// Which incident values a channel aggregates: kTo takes column j (channel j as
/// the source, aggregated over targets), kFrom takes row j, kBoth takes C + C'.
enum class Direction { kTo, kFrom, kBoth };

std::string direction_name(Direction d);
Direction parse_direction(const std::string& name);

struct IcecReport {
  std::string metric;
  BandWindow band;
  double top_fraction = 0.3;
  Direction direction = Direction::kTo;
  std::vector<std::string> channel_names;
  std::vector<double> raw;
  std::vector<double> normalized;
  /// Channel indices, highest normalized value first; ties resolve to the lower index.
  std::vector<std::size_t> ranking;
};

struct SelectionResult {
  std::size_t k = 0;
  std::vector<std::size_t> selected;
};

/// Mean over grid frequencies in [f_min, f_max] and valid windows in [w_min, w_max];
/// the denominator is the number of summed terms.
CollapsedMatrix collapse(const ConnectivityTensor& tensor, const BandWindow& bw);

/// ceil(top_fraction * (K - 1)), at least 1.
std::size_t top_count(std::size_t n_channels, double top_fraction);

IcecReport icec(const CollapsedMatrix& c, double top_fraction = 0.3,
                Direction direction = Direction::kTo);

SelectionResult select_channels(const IcecReport& report, std::size_t k);

/// Theta, mu, low-beta, high-beta, gamma, broad (8-30 Hz), full (1-40 Hz).
const std::vector<BandSpec>& band_presets();
/// Preset by name, or "lo-hi" in Hz (e.g. "8-30").
BandSpec parse_band(const std::string& text);

nlohmann::json to_json(const IcecReport& report);
IcecReport icec_report_from_json(const nlohmann::json& j);

}  // namespace ecselect
