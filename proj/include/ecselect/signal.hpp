#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ecselect {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ChannelMeta {
  int index = 0;
  std::string name;
  /// Scalp position in unit-disc coordinates (nose at +y), used for plotting only.
  std::optional<std::array<double, 2>> position;
};

/// Builds contiguous channel metadata from names, attaching known 10-10 positions.
std::vector<ChannelMeta> make_channels(const std::vector<std::string>& names);

/// Unit-disc position of a standard 10-10 electrode name, if known.
std::optional<std::array<double, 2>> standard_position(const std::string& name);

/// Trials x channels x samples, stored trial-major then channel then sample.
class EpochSet {
 public:
  EpochSet() = default;

  /// Zero-filled set with the given shape.
  EpochSet(std::size_t n_trials, std::vector<ChannelMeta> channels, std::size_t n_samples,
           double fs, std::optional<std::vector<int>> labels = std::nullopt);

  /// Takes ownership of `data` (size n_trials * n_channels * n_samples) and validates.
  EpochSet(std::vector<double> data, std::size_t n_trials, std::vector<ChannelMeta> channels,
           std::size_t n_samples, double fs,
           std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t n_trials() const noexcept { return n_trials_; }
  std::size_t n_channels() const noexcept { return channels_.size(); }
  std::size_t n_samples() const noexcept { return n_samples_; }
  double fs() const noexcept { return fs_; }

  const std::vector<ChannelMeta>& channels() const noexcept { return channels_; }
  std::vector<std::string> channel_names() const;

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  void set_labels(std::optional<std::vector<int>> labels);

  double& at(std::size_t trial, std::size_t channel, std::size_t sample) {
    return data_[offset(trial, channel) + sample];
  }
  double at(std::size_t trial, std::size_t channel, std::size_t sample) const {
    return data_[offset(trial, channel) + sample];
  }

  std::span<double> series(std::size_t trial, std::size_t channel) {
    return {data_.data() + offset(trial, channel), n_samples_};
  }
  std::span<const double> series(std::size_t trial, std::size_t channel) const {
    return {data_.data() + offset(trial, channel), n_samples_};
  }

  /// One trial as a channels x samples matrix view.
  Eigen::Map<RowMatrix> trial(std::size_t t) {
    return {data_.data() + offset(t, 0), static_cast<Eigen::Index>(n_channels()),
            static_cast<Eigen::Index>(n_samples_)};
  }
  Eigen::Map<const RowMatrix> trial(std::size_t t) const {
    return {data_.data() + offset(t, 0), static_cast<Eigen::Index>(n_channels()),
            static_cast<Eigen::Index>(n_samples_)};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& mutable_data() noexcept { return data_; }

  /// Throws FormatError when an invariant does not hold.
  void validate() const;

 private:
  std::size_t offset(std::size_t trial, std::size_t channel) const noexcept {
    return (trial * channels_.size() + channel) * n_samples_;
  }

  std::vector<double> data_;
  std::size_t n_trials_ = 0;
  std::size_t n_samples_ = 0;
  double fs_ = 1.0;
  std::vector<ChannelMeta> channels_;
  std::optional<std::vector<int>> labels_;
};

struct BandSpec {
  double f_low = 0.0;
  double f_high = 0.0;
  std::string name;

  /// Throws ConfigError unless 0 < f_low < f_high < fs/2.
  void validate(double fs) const;
};

enum class EpochFormat { kEegb, kCsv };

/// Picks the format from a file extension (".csv" or anything else -> EEGB).
EpochFormat format_from_path(const std::filesystem::path& path);

EpochSet load_epochs(const std::filesystem::path& path, EpochFormat format);
void save_epochs(const EpochSet& epochs, const std::filesystem::path& path, EpochFormat format);

EpochSet read_eegb(std::istream& in);
void write_eegb(const EpochSet& epochs, std::ostream& out);
/// `fs` overrides the rate inferred from the time column (needed for single-row files).
EpochSet read_csv(std::istream& in, std::optional<double> fs = std::nullopt);
void write_csv(const EpochSet& epochs, std::ostream& out);

/// Zero-phase Butterworth band-pass (forward-backward) applied per trial and channel.
/// The realized magnitude response is the squared single-pass response.
EpochSet bandpass_filter(const EpochSet& epochs, const BandSpec& band, int order);

/// Copies samples [start_sample, end_sample).
EpochSet segment(const EpochSet& epochs, std::size_t start_sample, std::size_t end_sample);

/// Per (channel, sample) z-score across trials, unbiased std; near-constant indices map to 0.
EpochSet ensemble_normalize(const EpochSet& epochs);

/// Keeps the listed channels in the given order, reindexed from 0.
EpochSet select_channel_subset(const EpochSet& epochs, std::span<const std::size_t> channels);

/// Keeps the listed trials (and their labels) in the given order.
EpochSet select_trials(const EpochSet& epochs, std::span<const std::size_t> trials);

}  // namespace ecselect
