// Residual whiteness and consistency diagnostics for fitted VAR models.
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "ecselect/error.hpp"
#include "ecselect/mvar.hpp"

namespace ecselect {

using Eigen::MatrixXd;

std::vector<MatrixXd> residuals(const VarModel& model, const EpochSet& epochs,
                                std::optional<SampleWindow> window) {
  model.validate();
  if (model.n_channels() != static_cast<int>(epochs.n_channels())) {
    throw ConfigError("model and data channel counts differ");
  }
  const SampleWindow w = window.value_or(SampleWindow{0, epochs.n_samples()});
  if (w.start + w.length > epochs.n_samples()) throw ConfigError("window exceeds trial length");
  const auto p = static_cast<Eigen::Index>(model.order);
  const auto n = static_cast<Eigen::Index>(w.length);
  if (n <= p) throw ConfigError("residuals need more samples than the model order");

  std::vector<MatrixXd> out;
  out.reserve(epochs.n_trials());
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    MatrixXd x = epochs.trial(t).middleCols(static_cast<Eigen::Index>(w.start), n);
    x.colwise() -= x.rowwise().mean();
    MatrixXd e = x.rightCols(n - p);
    for (Eigen::Index lag = 1; lag <= p; ++lag) {
      e.noalias() -= model.coeffs[static_cast<std::size_t>(lag - 1)] * x.middleCols(p - lag, n - p);
    }
    out.push_back(std::move(e));
  }
  return out;
}

double whiteness_check(const VarModel& model, const EpochSet& epochs, int max_lag,
                       std::optional<SampleWindow> window) {
  if (max_lag <= model.order) {
    throw ConfigError("whiteness max_lag must exceed the model order");
  }
  const std::vector<MatrixXd> res = residuals(model, epochs, window);
  const Eigen::Index k = model.n_channels();
  const Eigen::Index len = res.front().cols();
  if (len <= max_lag) throw ConfigError("residual series shorter than max_lag");

  double n_total = 0.0;
  for (const auto& e : res) n_total += static_cast<double>(e.cols());

  auto lag_cov = [&](Eigen::Index h) {
    MatrixXd c = MatrixXd::Zero(k, k);
    for (const auto& e : res) {
      c.noalias() += e.rightCols(len - h) * e.leftCols(len - h).transpose();
    }
    return MatrixXd(c / n_total);
  };

  const MatrixXd c0 = lag_cov(0);
  const Eigen::LDLT<MatrixXd> c0_solver(c0);
  if (c0_solver.info() != Eigen::Success) throw NumericalError("residual covariance singular");
  const MatrixXd c0_inv = c0_solver.solve(MatrixXd::Identity(k, k));

  double q = 0.0;
  const double trials = static_cast<double>(res.size());
  for (Eigen::Index h = 1; h <= max_lag; ++h) {
    const MatrixXd ch = lag_cov(h);
    const double term = (ch.transpose() * c0_inv * ch * c0_inv).trace();
    q += term / (n_total - static_cast<double>(h) * trials);
  }
  q *= n_total * n_total;

  const double dof = static_cast<double>(k * k * (max_lag - model.order));
  return boost::math::gamma_q(dof / 2.0, std::max(q, 0.0) / 2.0);
}

MatrixXd lagged_covariances(const EpochSet& epochs, int max_lag) {
  const auto k = static_cast<Eigen::Index>(epochs.n_channels());
  const auto n = static_cast<Eigen::Index>(epochs.n_samples());
  if (max_lag < 0 || max_lag >= n) throw ConfigError("max_lag out of range");
  MatrixXd stacked = MatrixXd::Zero(k, k * (max_lag + 1));
  double count = 0.0;
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    MatrixXd x = epochs.trial(t);
    x.colwise() -= x.rowwise().mean();
    for (Eigen::Index h = 0; h <= max_lag; ++h) {
      stacked.middleCols(h * k, k).noalias() +=
          x.rightCols(n - h) * x.leftCols(n - h).transpose();
    }
    count += static_cast<double>(n);
  }
  return stacked / count;
}

double percent_consistency(const MatrixXd& r_real, const MatrixXd& r_sim) {
  const double denom = r_real.norm();
  if (!(denom > 0.0)) throw NumericalError("reference correlation structure is zero");
  return 100.0 * (1.0 - (r_real - r_sim).norm() / denom);
}

double consistency_check(const VarModel& model, const EpochSet& epochs, std::uint64_t seed) {
  constexpr int kMaxLag = 20;
  const int lag = std::min<int>(kMaxLag, static_cast<int>(epochs.n_samples()) - 1);
  const std::size_t burn_in = 10 * static_cast<std::size_t>(model.order) + 100;
  const EpochSet sim = simulate_var(model, epochs.n_trials(), epochs.n_samples(), seed, burn_in);
  return percent_consistency(lagged_covariances(epochs, lag), lagged_covariances(sim, lag));
}

ValidationReport validate_model(const VarModel& model, const EpochSet& epochs, int max_lag,
                                std::uint64_t seed) {
  ValidationReport r;
  const StabilityResult s = stability_check(model);
  r.stable = s.stable;
  r.max_eigen_modulus = s.max_modulus;
  r.whiteness_pvalue = whiteness_check(model, epochs, max_lag);
  r.percent_consistency = consistency_check(model, epochs, seed);
  return r;
}

}  // namespace ecselect
