#include "ecselect/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ecselect/error.hpp"
#include "ecselect/parallel.hpp"

namespace ecselect {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

std::string metric_name(Metric metric) {
  switch (metric) {
    case Metric::kDtf:
      return "dtf";
    case Metric::kFfdtf:
      return "ffdtf";
    case Metric::kDdtf:
      return "ddtf";
    case Metric::kPdc:
      return "pdc";
    case Metric::kGpdc:
      return "gpdc";
    case Metric::kRpdc:
      return "rpdc";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::kDtf, Metric::kFfdtf, Metric::kDdtf, Metric::kPdc, Metric::kGpdc,
                   Metric::kRpdc}) {
    if (metric_name(m) == name) return m;
  }
  throw ConfigError("unknown connectivity metric '" + name + "'");
}

const std::vector<Metric>& ranking_metrics() {
  static const std::vector<Metric> kMetrics = {Metric::kDtf, Metric::kDdtf, Metric::kPdc,
                                               Metric::kGpdc, Metric::kRpdc};
  return kMetrics;
}

void FrequencyGrid::validate(double fs) const {
  if (freqs.empty()) throw ConfigError("frequency grid is empty");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0) || !(freqs[i] < fs / 2.0)) {
      throw ConfigError("grid frequency " + std::to_string(freqs[i]) + " outside (0, fs/2)");
    }
    if (i > 0 && !(freqs[i] > freqs[i - 1])) {
      throw ConfigError("frequency grid must be strictly increasing");
    }
  }
}

FrequencyGrid FrequencyGrid::uniform(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("invalid uniform grid");
  FrequencyGrid g;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) g.freqs.push_back(lo + step * static_cast<double>(i));
  return g;
}

bool SpectralMatrices::all_ok() const {
  for (bool b : ok) {
    if (!b) return false;
  }
  return true;
}

SpectralMatrices evaluate_spectrum(const VarModel& model, const FrequencyGrid& grid) {
  model.validate();
  if (grid.freqs.empty()) throw ConfigError("frequency grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = grid.freqs[i];
    if (f < 0.0 || f > model.fs / 2.0 || (i > 0 && !(f > grid.freqs[i - 1]))) {
      throw ConfigError("frequency grid must be increasing within [0, fs/2]");
    }
  }
  const Eigen::Index k = model.n_channels();
  const MatrixXcd sigma = model.noise_cov.cast<std::complex<double>>();

  SpectralMatrices out;
  out.grid = grid;
  out.a.resize(grid.size());
  out.h.resize(grid.size());
  out.s.resize(grid.size());
  out.ok.assign(grid.size(), true);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double omega = 2.0 * std::numbers::pi * grid.freqs[i] / model.fs;
    MatrixXcd a = MatrixXcd::Identity(k, k);
    for (int lag = 1; lag <= model.order; ++lag) {
      a -= model.coeffs[static_cast<std::size_t>(lag - 1)].cast<std::complex<double>>() *
           std::polar(1.0, -omega * lag);
    }
    Eigen::PartialPivLU<MatrixXcd> lu(a);
    const double rcond = lu.rcond();
    out.a[i] = a;
    if (!(rcond > 1e-12)) {
      out.ok[i] = false;
      out.h[i] = MatrixXcd::Zero(k, k);
      out.s[i] = MatrixXcd::Zero(k, k);
      continue;
    }
    out.h[i] = lu.inverse();
    MatrixXcd s = out.h[i] * sigma * out.h[i].adjoint();
    out.s[i] = 0.5 * (s + s.adjoint());
  }
  return out;
}

namespace {

void require_ok(const SpectralMatrices& spec) {
  if (!spec.all_ok()) throw NumericalError("system matrix singular at some grid frequency");
}

}  // namespace

MetricSpectrum dtf(const SpectralMatrices& spec) {
  require_ok(spec);
  MetricSpectrum out;
  out.reserve(spec.h.size());
  for (const MatrixXcd& h : spec.h) {
    const MatrixXd mag = h.cwiseAbs2();
    const Eigen::VectorXd rows = mag.rowwise().sum();
    if (!(rows.minCoeff() > 0.0)) throw NumericalError("zero transfer-function row");
    out.push_back(rows.cwiseInverse().asDiagonal() * mag);
  }
  return out;
}

MetricSpectrum ffdtf(const SpectralMatrices& spec) {
  require_ok(spec);
  const Eigen::Index k = spec.h.front().rows();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(k);
  for (const MatrixXcd& h : spec.h) rows += h.cwiseAbs2().rowwise().sum();
  if (!(rows.minCoeff() > 0.0)) throw NumericalError("zero transfer-function row");
  const Eigen::VectorXd inv = rows.cwiseInverse();
  MetricSpectrum out;
  out.reserve(spec.h.size());
  for (const MatrixXcd& h : spec.h) out.push_back(inv.asDiagonal() * h.cwiseAbs2());
  return out;
}

MetricSpectrum partial_coherence(const SpectralMatrices& spec) {
  require_ok(spec);
  MetricSpectrum out;
  out.reserve(spec.s.size());
  for (const MatrixXcd& s : spec.s) {
    const Eigen::Index k = s.rows();
    Eigen::LLT<MatrixXcd> llt(s);
    MatrixXcd eye = MatrixXcd::Identity(k, k);
    if (llt.info() != Eigen::Success) {
      const double eps = 1e-12 * s.trace().real() / static_cast<double>(k);
      llt.compute(s + eps * eye);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("spectral matrix singular after regularization");
      }
    }
    const MatrixXcd d = llt.solve(eye);
    MatrixXd p2(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        p2(i, j) = i == j ? 1.0 : std::norm(d(i, j)) / (d(i, i).real() * d(j, j).real());
      }
    }
    out.push_back(std::move(p2));
  }
  return out;
}

MetricSpectrum ddtf(const SpectralMatrices& spec) {
  MetricSpectrum eta = ffdtf(spec);
  const MetricSpectrum p2 = partial_coherence(spec);
  for (std::size_t f = 0; f < eta.size(); ++f) eta[f] = eta[f].cwiseProduct(p2[f]);
  return eta;
}

MetricSpectrum pdc(const SpectralMatrices& spec) {
  MetricSpectrum out;
  out.reserve(spec.a.size());
  for (const MatrixXcd& a : spec.a) {
    const MatrixXd mag = a.cwiseAbs2();
    const Eigen::RowVectorXd cols = mag.colwise().sum();
    if (!(cols.minCoeff() > 0.0)) throw NumericalError("zero system-matrix column");
    out.push_back(mag * cols.cwiseInverse().asDiagonal());
  }
  return out;
}

MetricSpectrum gpdc(const SpectralMatrices& spec, const MatrixXd& noise_cov) {
  const Eigen::VectorXd var = noise_cov.diagonal();
  if (!(var.minCoeff() > 0.0)) throw NumericalError("gpdc needs positive noise variances");
  const Eigen::VectorXd w = var.cwiseInverse();
  MetricSpectrum out;
  out.reserve(spec.a.size());
  for (const MatrixXcd& a : spec.a) {
    const MatrixXd mag = w.asDiagonal() * a.cwiseAbs2();
    const Eigen::RowVectorXd cols = mag.colwise().sum();
    if (!(cols.minCoeff() > 0.0)) throw NumericalError("zero system-matrix column");
    out.push_back(mag * cols.cwiseInverse().asDiagonal());
  }
  return out;
}

MetricSpectrum metric_spectrum(Metric metric, const VarModel& model,
                               const SpectralMatrices& spec) {
  switch (metric) {
    case Metric::kDtf:
      return dtf(spec);
    case Metric::kFfdtf:
      return ffdtf(spec);
    case Metric::kDdtf:
      return ddtf(spec);
    case Metric::kPdc:
      return pdc(spec);
    case Metric::kGpdc:
      return gpdc(spec, model.noise_cov);
    case Metric::kRpdc:
      return rpdc(spec, model, process_covariance(model));
  }
  throw ConfigError("unknown metric");
}

ConnectivityTensor::ConnectivityTensor(Metric metric_, std::size_t n_channels_,
                                       FrequencyGrid grid_,
                                       std::vector<std::size_t> window_starts_)
    : metric(metric_),
      n_channels(n_channels_),
      n_freqs(grid_.size()),
      n_windows(window_starts_.size()),
      values(n_channels_ * n_channels_ * grid_.size() * window_starts_.size(), 0.0),
      grid(std::move(grid_)),
      window_starts(std::move(window_starts_)),
      valid_windows(n_windows, true) {}

std::size_t ConnectivityTensor::valid_count() const {
  std::size_t n = 0;
  for (bool v : valid_windows) n += v ? 1 : 0;
  return n;
}

void ConnectivityTensor::validate() const {
  if (values.size() != n_channels * n_channels * n_freqs * n_windows) {
    throw FormatError("tensor payload size does not match its dimensions");
  }
  if (grid.size() != n_freqs || window_starts.size() != n_windows ||
      valid_windows.size() != n_windows) {
    throw FormatError("tensor metadata does not match its dimensions");
  }
  if (!channel_names.empty() && channel_names.size() != n_channels) {
    throw FormatError("tensor channel names do not match channel count");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw FormatError("tensor values must be finite and >= 0");
  }
}

std::vector<ConnectivityTensor> compute_connectivity(const WindowedVarModels& windowed,
                                                     const std::vector<Metric>& metrics,
                                                     const FrequencyGrid& grid) {
  if (metrics.empty()) throw ConfigError("metric list is empty");
  if (windowed.models.empty()) throw ConfigError("no windowed models");
  const double fs = windowed.models.front().fs;
  grid.validate(fs);
  const auto k = static_cast<std::size_t>(windowed.models.front().n_channels());

  std::vector<ConnectivityTensor> out;
  for (Metric m : metrics) {
    out.emplace_back(m, k, grid, windowed.window_starts);
    out.back().fs = fs;
  }
  const std::size_t n_w = windowed.models.size();
  const std::size_t n_f = grid.size();

  std::vector<char> ok_flags(n_w * metrics.size(), 0);
  parallel_for(n_w, [&](std::size_t w) {
    const bool fitted = windowed.valid.empty() || windowed.valid[w];
    if (!fitted) return;
    const SpectralMatrices spec = evaluate_spectrum(windowed.models[w], grid);
    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
      MetricSpectrum values;
      try {
        values = metric_spectrum(metrics[mi], windowed.models[w], spec);
      } catch (const NumericalError&) {
        continue;
      }
      ConnectivityTensor& t = out[mi];
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t f = 0; f < n_f; ++f) {
            t.at(i, j, f, w) = std::max(0.0, values[f](static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j)));
          }
        }
      }
      ok_flags[w * metrics.size() + mi] = 1;
    }
  });
  for (std::size_t w = 0; w < n_w; ++w) {
    for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
      out[mi].valid_windows[w] = ok_flags[w * metrics.size() + mi] != 0;
    }
  }
  return out;
}

ConnectivityTensor compute_connectivity(const WindowedVarModels& windowed, Metric metric,
                                        const FrequencyGrid& grid) {
  return std::move(compute_connectivity(windowed, std::vector<Metric>{metric}, grid).front());
}

}  // namespace ecselect
