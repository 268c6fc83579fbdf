#include "ecselect/mvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ecselect/error.hpp"
#include "ecselect/parallel.hpp"

namespace ecselect {

namespace {

using Eigen::MatrixXd;

SampleWindow resolve(const EpochSet& epochs, std::optional<SampleWindow> window) {
  SampleWindow w = window.value_or(SampleWindow{0, epochs.n_samples()});
  if (w.length == 0 || w.start + w.length > epochs.n_samples()) {
    throw ConfigError("analysis window exceeds trial length");
  }
  return w;
}

// Per-trial channels x samples copies with the window mean removed per channel.
std::vector<MatrixXd> centred_trials(const EpochSet& epochs, SampleWindow w) {
  std::vector<MatrixXd> out;
  out.reserve(epochs.n_trials());
  const auto len = static_cast<Eigen::Index>(w.length);
  const auto start = static_cast<Eigen::Index>(w.start);
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    MatrixXd x = epochs.trial(t).middleCols(start, len);
    x.colwise() -= x.rowwise().mean();
    out.push_back(std::move(x));
  }
  return out;
}

struct SymRoots {
  MatrixXd root;
  MatrixXd inv_root;
};

// Symmetric square root and its inverse; the symmetric factor keeps the lattice
// equivariant under channel permutation.
SymRoots symmetric_roots(const MatrixXd& m, const char* what) {
  const MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError(std::string("eigendecomposition failed for ") + what);
  }
  const Eigen::VectorXd vals = eig.eigenvalues();
  const double top = vals.cwiseAbs().maxCoeff();
  if (!(vals.minCoeff() > 1e-12 * top) || !(top > 0.0)) {
    throw NumericalError(std::string("singular ") + what + " during lattice recursion");
  }
  const MatrixXd& v = eig.eigenvectors();
  return {v * vals.cwiseSqrt().asDiagonal() * v.transpose(),
          v * vals.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose()};
}

}  // namespace

void VarModel::validate() const {
  if (order < 1) throw ConfigError("model order must be >= 1");
  if (static_cast<int>(coeffs.size()) != order) {
    throw ConfigError("coefficient count does not match model order");
  }
  const auto k = noise_cov.rows();
  if (noise_cov.cols() != k) throw ConfigError("noise covariance must be square");
  for (const auto& a : coeffs) {
    if (a.rows() != k || a.cols() != k) throw ConfigError("coefficient matrix has wrong shape");
    if (!a.allFinite()) throw NumericalError("non-finite coefficient");
  }
  if (!noise_cov.allFinite()) throw NumericalError("non-finite noise covariance");
  if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("noise covariance is not symmetric");
  }
}

VarModel fit_vieira_morf(const EpochSet& epochs, int order, std::optional<SampleWindow> window) {
  if (order < 1) throw ConfigError("model order must be >= 1");
  const SampleWindow w = resolve(epochs, window);
  const std::size_t k_ch = epochs.n_channels();
  const auto p = static_cast<std::size_t>(order);
  if (w.length <= p) throw ConfigError("window shorter than model order");
  const std::size_t usable = epochs.n_trials() * (w.length - p);
  if (usable < 5 * p * k_ch) {
    throw ConfigError("too few samples to identify a VAR(" + std::to_string(order) + ") on " +
                      std::to_string(k_ch) + " channels: " + std::to_string(usable) +
                      " usable, need " + std::to_string(5 * p * k_ch));
  }

  const auto K = static_cast<Eigen::Index>(k_ch);
  const auto n = static_cast<Eigen::Index>(w.length);
  std::vector<MatrixXd> ef = centred_trials(epochs, w);
  std::vector<MatrixXd> eb = ef;

  MatrixXd r0 = MatrixXd::Zero(K, K);
  for (const auto& x : ef) r0.noalias() += x * x.transpose();
  r0 /= static_cast<double>(epochs.n_trials() * w.length);

  MatrixXd pf = r0;
  MatrixXd pb = r0;
  std::vector<MatrixXd> fwd;  // A_{m,1..m}
  std::vector<MatrixXd> bwd;  // B_{m,1..m}

  for (Eigen::Index m = 1; m <= static_cast<Eigen::Index>(p); ++m) {
    const Eigen::Index len = n - m;
    MatrixXd sf = MatrixXd::Zero(K, K);
    MatrixXd sb = MatrixXd::Zero(K, K);
    MatrixXd sfb = MatrixXd::Zero(K, K);
    for (std::size_t t = 0; t < ef.size(); ++t) {
      const auto f = ef[t].middleCols(m, len);
      const auto b = eb[t].middleCols(m - 1, len);
      sf.noalias() += f * f.transpose();
      sb.noalias() += b * b.transpose();
      sfb.noalias() += f * b.transpose();
    }

    // Normalized partial correlation, then reflection matrices scaled by the
    // recursive forward/backward error covariances.
    const SymRoots rf = symmetric_roots(sf, "forward error covariance");
    const SymRoots rb = symmetric_roots(sb, "backward error covariance");
    const MatrixXd delta = rf.inv_root * sfb * rb.inv_root;
    const SymRoots qf = symmetric_roots(pf, "forward prediction covariance");
    const SymRoots qb = symmetric_roots(pb, "backward prediction covariance");
    const MatrixXd kf = qf.root * delta * qb.inv_root;
    const MatrixXd kb = qb.root * delta.transpose() * qf.inv_root;

    for (std::size_t t = 0; t < ef.size(); ++t) {
      const MatrixXd f = ef[t].middleCols(m, len);
      const MatrixXd b = eb[t].middleCols(m - 1, len);
      ef[t].middleCols(m, len) = f - kf * b;
      eb[t].middleCols(m, len) = b - kb * f;
    }

    std::vector<MatrixXd> next_fwd(static_cast<std::size_t>(m));
    std::vector<MatrixXd> next_bwd(static_cast<std::size_t>(m));
    for (Eigen::Index j = 1; j < m; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const auto mj = static_cast<std::size_t>(m - j);
      next_fwd[ju - 1] = fwd[ju - 1] - kf * bwd[mj - 1];
      next_bwd[ju - 1] = bwd[ju - 1] - kb * fwd[mj - 1];
    }
    next_fwd[static_cast<std::size_t>(m - 1)] = kf;
    next_bwd[static_cast<std::size_t>(m - 1)] = kb;
    fwd = std::move(next_fwd);
    bwd = std::move(next_bwd);

    pf = (MatrixXd::Identity(K, K) - kf * kb) * pf;
    pb = (MatrixXd::Identity(K, K) - kb * kf) * pb;
    pf = 0.5 * (pf + pf.transpose()).eval();
    pb = 0.5 * (pb + pb.transpose()).eval();
  }

  VarModel model;
  model.order = order;
  model.coeffs = std::move(fwd);
  model.noise_cov = pf;
  model.fs = epochs.fs();
  model.n_obs = epochs.n_trials() * w.length;
  model.validate();
  return model;
}

double aic(const VarModel& model) {
  const double det = model.noise_cov.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw NumericalError("residual covariance determinant is not positive");
  }
  const double k = model.n_channels();
  return std::log(std::abs(det)) +
         2.0 / static_cast<double>(model.n_obs) * model.order * k * k;
}

namespace {

OrderSelection pick(std::vector<int> orders, std::vector<double> values) {
  OrderSelection sel;
  sel.candidate_orders = std::move(orders);
  sel.aic_values = std::move(values);
  sel.failed.resize(sel.aic_values.size());
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < sel.aic_values.size(); ++i) {
    sel.failed[i] = !std::isfinite(sel.aic_values[i]);
    if (sel.failed[i]) continue;
    const double v = sel.aic_values[i];
    const int o = sel.candidate_orders[i];
    if (!any || v < best || (v == best && o < sel.chosen)) {
      best = v;
      sel.chosen = o;
      any = true;
    }
  }
  if (!any) throw NumericalError("model order selection failed for every candidate order");
  return sel;
}

void check_candidates(const std::vector<int>& orders) {
  if (orders.empty()) throw ConfigError("candidate order list is empty");
  for (int o : orders) {
    if (o < 1) throw ConfigError("candidate orders must be >= 1");
  }
}

}  // namespace

OrderSelection select_order(const EpochSet& epochs, const std::vector<int>& candidate_orders,
                            std::optional<SampleWindow> window) {
  check_candidates(candidate_orders);
  std::vector<double> values(candidate_orders.size());
  parallel_for(candidate_orders.size(), [&](std::size_t i) {
    try {
      values[i] = aic(fit_vieira_morf(epochs, candidate_orders[i], window));
    } catch (const Error&) {
      values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return pick(candidate_orders, std::move(values));
}

OrderSelection select_order_windowed(const EpochSet& epochs,
                                     const std::vector<int>& candidate_orders,
                                     std::size_t window_samples, std::size_t step_samples,
                                     std::size_t max_windows) {
  check_candidates(candidate_orders);
  const std::size_t n_w = window_count(epochs.n_samples(), window_samples, step_samples);
  std::vector<std::size_t> picks;
  const std::size_t take = max_windows == 0 ? n_w : std::min(n_w, max_windows);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t idx = take == 1 ? 0 : i * (n_w - 1) / (take - 1);
    picks.push_back(idx * step_samples);
  }
  std::vector<double> values(candidate_orders.size());
  parallel_for(candidate_orders.size(), [&](std::size_t i) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t start : picks) {
      try {
        sum += aic(fit_vieira_morf(epochs, candidate_orders[i], SampleWindow{start, window_samples}));
        ++ok;
      } catch (const Error&) {
      }
    }
    values[i] = ok == picks.size() ? sum / static_cast<double>(ok)
                                   : std::numeric_limits<double>::quiet_NaN();
  });
  return pick(candidate_orders, std::move(values));
}

MatrixXd companion_matrix(const VarModel& model) {
  const Eigen::Index k = model.n_channels();
  const Eigen::Index p = model.order;
  MatrixXd f = MatrixXd::Zero(k * p, k * p);
  for (Eigen::Index j = 0; j < p; ++j) {
    f.block(0, j * k, k, k) = model.coeffs[static_cast<std::size_t>(j)];
  }
  if (p > 1) f.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  return f;
}

StabilityResult stability_check(const VarModel& model) {
  const MatrixXd f = companion_matrix(model);
  Eigen::EigenSolver<MatrixXd> eig(f, false);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("companion eigenvalue computation failed");
  }
  const double radius = eig.eigenvalues().cwiseAbs().maxCoeff();
  return {radius < 1.0, radius};
}

EpochSet simulate_var(const VarModel& model, std::size_t n_trials, std::size_t n_samples,
                      std::uint64_t seed, std::size_t burn_in) {
  model.validate();
  const Eigen::Index k = model.n_channels();
  const std::size_t p = static_cast<std::size_t>(model.order);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(model.noise_cov);
  const MatrixXd mix =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::vector<ChannelMeta> channels;
  for (Eigen::Index c = 0; c < k; ++c) {
    channels.push_back({static_cast<int>(c), "X" + std::to_string(c + 1), std::nullopt});
  }
  EpochSet out(n_trials, std::move(channels), n_samples, model.fs);

  const std::size_t total = burn_in + n_samples;
  for (std::size_t t = 0; t < n_trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    MatrixXd x = MatrixXd::Zero(k, static_cast<Eigen::Index>(total));
    Eigen::VectorXd z(k);
    for (std::size_t s = 0; s < total; ++s) {
      for (Eigen::Index c = 0; c < k; ++c) z(c) = normal(rng);
      Eigen::VectorXd v = mix * z;
      for (std::size_t lag = 1; lag <= p && lag <= s; ++lag) {
        v.noalias() += model.coeffs[lag - 1] * x.col(static_cast<Eigen::Index>(s - lag));
      }
      x.col(static_cast<Eigen::Index>(s)) = v;
    }
    out.trial(t) = x.rightCols(static_cast<Eigen::Index>(n_samples));
  }
  return out;
}

std::size_t window_count(std::size_t n_samples, std::size_t window_samples,
                         std::size_t step_samples) {
  if (window_samples == 0 || step_samples == 0) throw ConfigError("window and step must be > 0");
  if (window_samples > n_samples) throw ConfigError("window longer than trial");
  return (n_samples - window_samples) / step_samples + 1;
}

std::size_t seconds_to_samples(double seconds, double fs) {
  const long v = std::lround(seconds * fs);
  return static_cast<std::size_t>(std::max(1L, v));
}

WindowedVarModels fit_windowed(const EpochSet& epochs, int order, double window_length_s,
                               double step_s) {
  if (!(step_s > 0.0)) throw ConfigError("window step must be positive");
  if (!(window_length_s > 0.0)) throw ConfigError("window length must be positive");
  WindowedVarModels out;
  out.window_length_s = window_length_s;
  out.step_s = step_s;
  out.window_samples = seconds_to_samples(window_length_s, epochs.fs());
  out.step_samples = seconds_to_samples(step_s, epochs.fs());
  if (out.window_samples < 2 * static_cast<std::size_t>(order)) {
    throw ConfigError("window must hold at least twice the model order in samples");
  }
  const std::size_t n_w = window_count(epochs.n_samples(), out.window_samples, out.step_samples);
  for (std::size_t i = 0; i < n_w; ++i) out.window_starts.push_back(i * out.step_samples);

  out.models.resize(n_w);
  out.errors.resize(n_w);
  std::vector<char> ok(n_w, 0);
  parallel_for(n_w, [&](std::size_t i) {
    try {
      out.models[i] =
          fit_vieira_morf(epochs, order, SampleWindow{out.window_starts[i], out.window_samples});
      ok[i] = 1;
    } catch (const NumericalError& e) {
      VarModel placeholder;
      placeholder.order = order;
      const auto k = static_cast<Eigen::Index>(epochs.n_channels());
      placeholder.coeffs.assign(static_cast<std::size_t>(order), MatrixXd::Zero(k, k));
      placeholder.noise_cov = MatrixXd::Identity(k, k);
      placeholder.fs = epochs.fs();
      placeholder.n_obs = epochs.n_trials() * out.window_samples;
      out.models[i] = std::move(placeholder);
      out.errors[i] = e.what();
    }
  });
  out.valid.assign(ok.begin(), ok.end());
  return out;
}

}  // namespace ecselect
