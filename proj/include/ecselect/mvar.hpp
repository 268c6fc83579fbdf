#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ecselect/signal.hpp"

namespace ecselect {

/// x(t) = sum_k coeffs[k-1] x(t-k) + e(t), e ~ (0, noise_cov).
struct VarModel {
  int order = 1;
  std::vector<Eigen::MatrixXd> coeffs;
  Eigen::MatrixXd noise_cov;
  double fs = 1.0;
  /// Data points that went into the fit (trials x window samples).
  std::size_t n_obs = 0;

  int n_channels() const noexcept { return static_cast<int>(noise_cov.rows()); }
  void validate() const;
};

/// Samples [start, start + length) of every trial.
struct SampleWindow {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct WindowedVarModels {
  double window_length_s = 0.5;
  double step_s = 0.03;
  std::size_t window_samples = 0;
  std::size_t step_samples = 0;
  std::vector<std::size_t> window_starts;
  std::vector<VarModel> models;
  /// False where the window fit failed; those models are placeholders.
  std::vector<bool> valid;
  std::vector<std::string> errors;
};

struct OrderSelection {
  std::vector<int> candidate_orders;
  /// NaN for candidates whose fit failed.
  std::vector<double> aic_values;
  std::vector<bool> failed;
  int chosen = 0;
};

struct ValidationReport {
  bool stable = false;
  double max_eigen_modulus = 0.0;
  double whiteness_pvalue = 0.0;
  double percent_consistency = 0.0;
};

struct StabilityResult {
  bool stable = false;
  double max_modulus = 0.0;
};

/// Multichannel Vieira-Morf lattice fit over every trial in the window. Each trial
/// is mean-removed per channel inside the window before the recursion.
VarModel fit_vieira_morf(const EpochSet& epochs, int order,
                         std::optional<SampleWindow> window = std::nullopt);

/// AIC(p) = ln|det V| + 2 p K^2 / N with N the data-point count of the fit.
double aic(const VarModel& model);

OrderSelection select_order(const EpochSet& epochs, const std::vector<int>& candidate_orders,
                            std::optional<SampleWindow> window = std::nullopt);

/// Averages AIC over up to `max_windows` evenly spaced analysis windows.
OrderSelection select_order_windowed(const EpochSet& epochs,
                                     const std::vector<int>& candidate_orders,
                                     std::size_t window_samples, std::size_t step_samples,
                                     std::size_t max_windows);

/// (K p) x (K p) block companion matrix [[A1 ... Ap], [I 0]].
Eigen::MatrixXd companion_matrix(const VarModel& model);

StabilityResult stability_check(const VarModel& model);

/// One-step prediction residuals per trial (channels x (n - p)), after the same
/// per-channel mean removal the fit applies.
std::vector<Eigen::MatrixXd> residuals(const VarModel& model, const EpochSet& epochs,
                                       std::optional<SampleWindow> window = std::nullopt);

/// Multivariate Ljung-Box portmanteau p-value, chi-square with K^2 (max_lag - p) dof.
double whiteness_check(const VarModel& model, const EpochSet& epochs, int max_lag,
                       std::optional<SampleWindow> window = std::nullopt);

/// Stacked auto/cross-covariances at lags 0..max_lag (pooled over trials).
Eigen::MatrixXd lagged_covariances(const EpochSet& epochs, int max_lag);

/// 100 (1 - ||R_real - R_sim|| / ||R_real||) with R stacked covariances to lag 20.
double percent_consistency(const Eigen::MatrixXd& r_real, const Eigen::MatrixXd& r_sim);

double consistency_check(const VarModel& model, const EpochSet& epochs,
                         std::uint64_t seed = 0);

ValidationReport validate_model(const VarModel& model, const EpochSet& epochs, int max_lag,
                                std::uint64_t seed = 0);

/// Seeded Gaussian simulation of `model`, one independent stream per trial.
EpochSet simulate_var(const VarModel& model, std::size_t n_trials, std::size_t n_samples,
                      std::uint64_t seed, std::size_t burn_in = 0);

std::size_t window_count(std::size_t n_samples, std::size_t window_samples,
                         std::size_t step_samples);

/// round(seconds * fs) samples, at least 1 for the step.
std::size_t seconds_to_samples(double seconds, double fs);

WindowedVarModels fit_windowed(const EpochSet& epochs, int order, double window_length_s = 0.5,
                               double step_s = 0.03);

}  // namespace ecselect
