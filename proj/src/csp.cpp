#include "ecselect/csp.hpp"

#include <algorithm>
#include <cmath>

#include "ecselect/error.hpp"

namespace ecselect {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<int> distinct_labels(const std::vector<int>& labels) {
  std::vector<int> out = labels;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MatrixXd normalized_covariance(const EpochSet& epochs, std::size_t trial) {
  const MatrixXd x = epochs.trial(trial);
  const MatrixXd centred = x.colwise() - x.rowwise().mean();
  const MatrixXd c = centred * centred.transpose();
  const double tr = c.trace();
  if (!(tr > 0.0)) {
    throw NumericalError("trial " + std::to_string(trial) + " has zero power");
  }
  return c / tr;
}

MatrixXd class_covariance(const EpochSet& epochs, const std::vector<std::size_t>& trials) {
  if (trials.empty()) throw ConfigError("empty class");
  const auto k = static_cast<Eigen::Index>(epochs.n_channels());
  MatrixXd sum = MatrixXd::Zero(k, k);
  for (std::size_t t : trials) sum += normalized_covariance(epochs, t);
  return sum / static_cast<double>(trials.size());
}

CspModel csp_from_covariances(const MatrixXd& c_a, const MatrixXd& c_b, int n_pairs) {
  const Eigen::Index k = c_a.rows();
  if (n_pairs < 1 || 2 * n_pairs > k) {
    throw ConfigError("CSP needs 1 <= m and 2m <= K (m = " + std::to_string(n_pairs) +
                      ", K = " + std::to_string(k) + ")");
  }
  MatrixXd composite = c_a + c_b;
  CspModel model;
  model.n_pairs = n_pairs;

  const Eigen::SelfAdjointEigenSolver<MatrixXd> comp(composite, Eigen::EigenvaluesOnly);
  const double tr = composite.trace();
  if (comp.eigenvalues().minCoeff() <= 1e-12 * tr) {
    composite += 1e-9 * tr * MatrixXd::Identity(k, k);
    model.regularized = true;
  }
  const Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(c_a, composite);
  if (ges.info() != Eigen::Success) throw NumericalError("CSP generalized eigenproblem failed");

  // Eigen returns ascending eigenvalues with B-orthonormal eigenvectors.
  model.eigenvalues = ges.eigenvalues().reverse();
  model.filters.resize(2 * n_pairs, k);
  for (int r = 0; r < n_pairs; ++r) {
    model.filters.row(r) = ges.eigenvectors().col(k - 1 - r).transpose();
    model.filters.row(n_pairs + r) = ges.eigenvectors().col(n_pairs - 1 - r).transpose();
  }
  return model;
}

CspModel csp_fit(const EpochSet& class_a, const EpochSet& class_b, int n_pairs) {
  if (class_a.n_channels() != class_b.n_channels() || class_a.fs() != class_b.fs()) {
    throw ConfigError("CSP classes must share channels and fs");
  }
  if (class_a.n_trials() < 2 || class_b.n_trials() < 2) {
    throw ConfigError("CSP needs at least 2 trials per class");
  }
  std::vector<std::size_t> ta(class_a.n_trials());
  std::vector<std::size_t> tb(class_b.n_trials());
  for (std::size_t i = 0; i < ta.size(); ++i) ta[i] = i;
  for (std::size_t i = 0; i < tb.size(); ++i) tb[i] = i;
  return csp_from_covariances(class_covariance(class_a, ta), class_covariance(class_b, tb),
                              n_pairs);
}

MatrixXd csp_features(const CspModel& model, const EpochSet& epochs) {
  if (static_cast<std::size_t>(model.filters.cols()) != epochs.n_channels()) {
    throw ConfigError("CSP model channel count does not match the epochs");
  }
  const double floor = std::log(1e-12);
  const Eigen::Index n_f = model.filters.rows();
  MatrixXd out(static_cast<Eigen::Index>(epochs.n_trials()), n_f);
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    const MatrixXd z = model.filters * epochs.trial(t);
    const MatrixXd centred = z.colwise() - z.rowwise().mean();
    const VectorXd var = centred.rowwise().squaredNorm();
    const double total = var.sum();
    for (Eigen::Index r = 0; r < n_f; ++r) {
      const double share = total > 0.0 ? var(r) / total : 0.0;
      out(static_cast<Eigen::Index>(t), r) = share > 1e-12 ? std::log(share) : floor;
    }
  }
  return out;
}

MulticlassCsp csp_fit_multiclass(const EpochSet& epochs, int n_pairs) {
  if (!epochs.has_labels()) throw ConfigError("multiclass CSP needs labeled epochs");
  const std::vector<int>& labels = *epochs.labels();
  MulticlassCsp out;
  out.classes = distinct_labels(labels);
  if (out.classes.size() < 2) throw ConfigError("CSP needs at least two classes");

  std::vector<MatrixXd> covs(epochs.n_trials());
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) covs[t] = normalized_covariance(epochs, t);
  const auto k = static_cast<Eigen::Index>(epochs.n_channels());
  for (int cls : out.classes) {
    MatrixXd in = MatrixXd::Zero(k, k);
    MatrixXd rest = MatrixXd::Zero(k, k);
    std::size_t n_in = 0;
    std::size_t n_rest = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (labels[t] == cls) {
        in += covs[t];
        ++n_in;
      } else {
        rest += covs[t];
        ++n_rest;
      }
    }
    if (n_in < 2 || n_rest < 2) {
      throw ConfigError("class " + std::to_string(cls) + " needs at least 2 trials on each side");
    }
    out.models.push_back(csp_from_covariances(in / static_cast<double>(n_in),
                                              rest / static_cast<double>(n_rest), n_pairs));
  }
  return out;
}

MatrixXd csp_features(const MulticlassCsp& model, const EpochSet& epochs) {
  std::vector<MatrixXd> blocks;
  Eigen::Index cols = 0;
  for (const CspModel& m : model.models) {
    blocks.push_back(csp_features(m, epochs));
    cols += blocks.back().cols();
  }
  MatrixXd out(static_cast<Eigen::Index>(epochs.n_trials()), cols);
  Eigen::Index at = 0;
  for (const MatrixXd& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

}  // namespace ecselect
