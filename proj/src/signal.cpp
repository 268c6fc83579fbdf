#include "ecselect/signal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include "ecselect/butterworth.hpp"
#include "ecselect/error.hpp"

namespace ecselect {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kFormat:
      return "format";
    case ErrorKind::kNumerical:
      return "numerical";
  }
  return "unknown";
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::optional<std::array<double, 2>> standard_position(const std::string& raw_name) {
  std::string name = upper(raw_name);
  // Legacy 10-20 temporal labels.
  if (name == "T3") name = "T7";
  if (name == "T4") name = "T8";
  if (name == "T5") name = "P7";
  if (name == "T6") name = "P8";

  std::size_t split = 0;
  while (split < name.size() && std::isalpha(static_cast<unsigned char>(name[split]))) ++split;
  std::string prefix = name.substr(0, split);
  std::string suffix = name.substr(split);
  if (suffix.empty() && !prefix.empty() && prefix.back() == 'Z') {
    prefix.pop_back();
    suffix = "Z";
  }

  int row = 0;
  if (prefix == "FP") row = 4;
  else if (prefix == "AF") row = 3;
  else if (prefix == "F") row = 2;
  else if (prefix == "FC" || prefix == "FT") row = 1;
  else if (prefix == "C" || prefix == "T") row = 0;
  else if (prefix == "CP" || prefix == "TP") row = -1;
  else if (prefix == "P") row = -2;
  else if (prefix == "PO") row = -3;
  else if (prefix == "O") row = -4;
  else return std::nullopt;

  int col = 0;
  if (suffix == "Z") {
    col = 0;
  } else {
    if (suffix.empty() || suffix.size() > 2 ||
        !std::all_of(suffix.begin(), suffix.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::nullopt;
    }
    const int n = std::stoi(suffix);
    if (n < 1 || n > 10) return std::nullopt;
    col = (n % 2 == 1) ? -(n + 1) / 2 : n / 2;
  }

  const double ring = 0.8;
  if (std::abs(row) == 4) {
    // Fp and O rows sit on the outer ring, 18 degrees apart.
    const double angle = col * 18.0 * std::numbers::pi / 180.0;
    const double sign = row > 0 ? 1.0 : -1.0;
    return std::array<double, 2>{ring * std::sin(angle), sign * ring * std::cos(angle)};
  }
  const double y = 0.2 * row;
  const double x = 0.2 * col * std::sqrt(1.0 - (y / ring) * (y / ring));
  return std::array<double, 2>{x, y};
}

std::vector<ChannelMeta> make_channels(const std::vector<std::string>& names) {
  std::vector<ChannelMeta> out;
  out.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.push_back({static_cast<int>(i), names[i], standard_position(names[i])});
  }
  return out;
}

EpochSet::EpochSet(std::size_t n_trials, std::vector<ChannelMeta> channels,
                   std::size_t n_samples, double fs, std::optional<std::vector<int>> labels)
    : data_(n_trials * channels.size() * n_samples, 0.0),
      n_trials_(n_trials),
      n_samples_(n_samples),
      fs_(fs),
      channels_(std::move(channels)),
      labels_(std::move(labels)) {
  validate();
}

EpochSet::EpochSet(std::vector<double> data, std::size_t n_trials,
                   std::vector<ChannelMeta> channels, std::size_t n_samples, double fs,
                   std::optional<std::vector<int>> labels)
    : data_(std::move(data)),
      n_trials_(n_trials),
      n_samples_(n_samples),
      fs_(fs),
      channels_(std::move(channels)),
      labels_(std::move(labels)) {
  validate();
}

std::vector<std::string> EpochSet::channel_names() const {
  std::vector<std::string> names;
  names.reserve(channels_.size());
  for (const auto& c : channels_) names.push_back(c.name);
  return names;
}

void EpochSet::set_labels(std::optional<std::vector<int>> labels) {
  if (labels && labels->size() != n_trials_) {
    throw FormatError("label count does not match trial count");
  }
  labels_ = std::move(labels);
}

void EpochSet::validate() const {
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) throw FormatError("sampling rate must be positive");
  if (data_.size() != n_trials_ * channels_.size() * n_samples_) {
    throw FormatError("data size does not match n_trials * n_channels * n_samples");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (channels_[i].index != static_cast<int>(i)) {
      throw FormatError("channel indices must be contiguous from 0");
    }
    if (!names.insert(channels_[i].name).second) {
      throw FormatError("duplicate channel name '" + channels_[i].name + "'");
    }
  }
  if (labels_ && labels_->size() != n_trials_) {
    throw FormatError("label count does not match trial count");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw FormatError("non-finite sample value");
  }
}

void BandSpec::validate(double fs) const {
  if (!(f_low > 0.0) || !(f_low < f_high) || !(f_high < fs / 2.0)) {
    throw ConfigError("band '" + name + "' must satisfy 0 < f_low < f_high < fs/2");
  }
}

EpochSet bandpass_filter(const EpochSet& epochs, const BandSpec& band, int order) {
  band.validate(epochs.fs());
  const SosCascade sos = design_butterworth_bandpass(order, band.f_low, band.f_high, epochs.fs());
  // Reflection length is three times the band-pass order (2 * prototype order).
  const std::size_t pad = static_cast<std::size_t>(3 * order * 2);
  EpochSet out = epochs;
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    for (std::size_t c = 0; c < epochs.n_channels(); ++c) {
      const std::vector<double> y = sos_filtfilt(sos, epochs.series(t, c), pad);
      std::copy(y.begin(), y.end(), out.series(t, c).begin());
    }
  }
  return out;
}

EpochSet segment(const EpochSet& epochs, std::size_t start_sample, std::size_t end_sample) {
  if (start_sample >= end_sample || end_sample > epochs.n_samples()) {
    throw ConfigError("segment range [" + std::to_string(start_sample) + ", " +
                      std::to_string(end_sample) + ") is empty or outside 0.." +
                      std::to_string(epochs.n_samples()));
  }
  const std::size_t n = end_sample - start_sample;
  EpochSet out(epochs.n_trials(), epochs.channels(), n, epochs.fs(), epochs.labels());
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    for (std::size_t c = 0; c < epochs.n_channels(); ++c) {
      const auto src = epochs.series(t, c).subspan(start_sample, n);
      std::copy(src.begin(), src.end(), out.series(t, c).begin());
    }
  }
  return out;
}

EpochSet ensemble_normalize(const EpochSet& epochs) {
  const std::size_t n_trials = epochs.n_trials();
  if (n_trials < 2) throw ConfigError("ensemble normalization needs at least 2 trials");
  EpochSet out = epochs;
  for (std::size_t c = 0; c < epochs.n_channels(); ++c) {
    for (std::size_t s = 0; s < epochs.n_samples(); ++s) {
      double mean = 0.0;
      for (std::size_t t = 0; t < n_trials; ++t) mean += epochs.at(t, c, s);
      mean /= static_cast<double>(n_trials);
      double ss = 0.0;
      for (std::size_t t = 0; t < n_trials; ++t) {
        const double d = epochs.at(t, c, s) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n_trials - 1));
      for (std::size_t t = 0; t < n_trials; ++t) {
        out.at(t, c, s) = sd < 1e-12 ? 0.0 : (epochs.at(t, c, s) - mean) / sd;
      }
    }
  }
  return out;
}

EpochSet select_channel_subset(const EpochSet& epochs, std::span<const std::size_t> channels) {
  std::vector<ChannelMeta> meta;
  meta.reserve(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] >= epochs.n_channels()) throw ConfigError("channel index out of range");
    ChannelMeta m = epochs.channels()[channels[i]];
    m.index = static_cast<int>(i);
    meta.push_back(std::move(m));
  }
  EpochSet out(epochs.n_trials(), std::move(meta), epochs.n_samples(), epochs.fs(),
               epochs.labels());
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const auto src = epochs.series(t, channels[i]);
      std::copy(src.begin(), src.end(), out.series(t, i).begin());
    }
  }
  return out;
}

EpochSet select_trials(const EpochSet& epochs, std::span<const std::size_t> trials) {
  for (std::size_t t : trials) {
    if (t >= epochs.n_trials()) throw ConfigError("trial index out of range");
  }
  std::optional<std::vector<int>> labels;
  if (epochs.has_labels()) {
    labels.emplace();
    for (std::size_t t : trials) labels->push_back(epochs.labels()->at(t));
  }
  EpochSet out(trials.size(), epochs.channels(), epochs.n_samples(), epochs.fs(),
               std::move(labels));
  for (std::size_t i = 0; i < trials.size(); ++i) {
    out.trial(i) = epochs.trial(trials[i]);
  }
  return out;
}

}  // namespace ecselect
