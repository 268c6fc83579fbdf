#pragma once

#include <cstddef>
#include <iosfwd>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecselect/mvar.hpp"

namespace ecselect {

enum class Metric { kDtf, kFfdtf, kDdtf, kPdc, kGpdc, kRpdc };

std::string metric_name(Metric metric);
/// Throws ConfigError for unknown names.
Metric parse_metric(const std::string& name);
/// The five metrics that feed channel ranking: dtf, ddtf, pdc, gpdc, rpdc.
const std::vector<Metric>& ranking_metrics();

struct FrequencyGrid {
  std::vector<double> freqs;

  std::size_t size() const noexcept { return freqs.size(); }
  /// Non-empty, strictly increasing, inside (0, fs/2).
  void validate(double fs) const;
  /// lo, lo + step, ..., up to hi inclusive.
  static FrequencyGrid uniform(double lo, double hi, double step = 1.0);
};

/// Per-frequency system matrix A(f), transfer function H(f) = A(f)^-1 and spectral
/// density S(f) = H Sigma H^*. A(f) = I - sum_k A_k exp(-i 2 pi f k / fs).
struct SpectralMatrices {
  FrequencyGrid grid;
  std::vector<Eigen::MatrixXcd> a;
  std::vector<Eigen::MatrixXcd> h;
  std::vector<Eigen::MatrixXcd> s;
  /// False where A(f) is numerically singular (condition number > 1e12).
  std::vector<bool> ok;

  bool all_ok() const;
};

/// One real K x K matrix per grid frequency.
using MetricSpectrum = std::vector<Eigen::MatrixXd>;

/// Frequencies may include 0 and fs/2 here; the connectivity grid may not.
SpectralMatrices evaluate_spectrum(const VarModel& model, const FrequencyGrid& grid);

MetricSpectrum dtf(const SpectralMatrices& spec);
MetricSpectrum ffdtf(const SpectralMatrices& spec);
MetricSpectrum partial_coherence(const SpectralMatrices& spec);
MetricSpectrum ddtf(const SpectralMatrices& spec);
MetricSpectrum pdc(const SpectralMatrices& spec);
MetricSpectrum gpdc(const SpectralMatrices& spec, const Eigen::MatrixXd& noise_cov);

/// Stationary covariance of the stacked state [x(t-1); ...; x(t-p)].
struct ProcessCovariance {
  Eigen::MatrixXd r;
};

/// Solves R = F R F' + Q (F companion, Q = Sigma in the leading block) by doubling.
ProcessCovariance process_covariance(const VarModel& model);

/// lambda_ij(f) = Q' V^+ Q with Q = (Re A_ij, Im A_ij) and
/// V = Sigma_ii sum_{k,l} (R^-1)_{(j,k),(j,l)} Z(w, k, l).
MetricSpectrum rpdc(const SpectralMatrices& spec, const VarModel& model,
                    const ProcessCovariance& cov);

/// Metric spectrum for a single model (rpdc solves the process covariance itself).
MetricSpectrum metric_spectrum(Metric metric, const VarModel& model, const SpectralMatrices& spec);

/// Values indexed [to i][from j][frequency f][window w].
struct ConnectivityTensor {
  Metric metric = Metric::kPdc;
  std::size_t n_channels = 0;
  std::size_t n_freqs = 0;
  std::size_t n_windows = 0;
  std::vector<double> values;
  FrequencyGrid grid;
  std::vector<std::size_t> window_starts;
  std::vector<bool> valid_windows;
  std::vector<std::string> channel_names;
  double fs = 0.0;

  ConnectivityTensor() = default;
  ConnectivityTensor(Metric metric, std::size_t n_channels, FrequencyGrid grid,
                     std::vector<std::size_t> window_starts);

  std::size_t index(std::size_t to, std::size_t from, std::size_t f, std::size_t w) const {
    return ((to * n_channels + from) * n_freqs + f) * n_windows + w;
  }
  double& at(std::size_t to, std::size_t from, std::size_t f, std::size_t w) {
    return values[index(to, from, f, w)];
  }
  double at(std::size_t to, std::size_t from, std::size_t f, std::size_t w) const {
    return values[index(to, from, f, w)];
  }
  std::size_t valid_count() const;
  void validate() const;
};

/// Evaluates each metric over every window; windows whose fit or metric fails are
/// marked invalid and zero-filled.
std::vector<ConnectivityTensor> compute_connectivity(const WindowedVarModels& windowed,
                                                     const std::vector<Metric>& metrics,
                                                     const FrequencyGrid& grid);

ConnectivityTensor compute_connectivity(const WindowedVarModels& windowed, Metric metric,
                                        const FrequencyGrid& grid);

/// ECT1: "ECT1", u32 LE header length, JSON header, float32 LE payload.
void write_ect1(const ConnectivityTensor& tensor, std::ostream& out);
ConnectivityTensor read_ect1(std::istream& in);
void save_tensor(const ConnectivityTensor& tensor, const std::filesystem::path& path);
ConnectivityTensor load_tensor(const std::filesystem::path& path);

}  // namespace ecselect
