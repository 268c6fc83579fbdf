#include "ecselect/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecselect/csp.hpp"
#include "ecselect/error.hpp"

namespace ecselect {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double rbf_kernel(const Eigen::Ref<const VectorXd>& u, const Eigen::Ref<const VectorXd>& v,
                  double gamma) {
  return std::exp(-gamma * (u - v).squaredNorm());
}

double BinarySvm::decision(const Eigen::Ref<const VectorXd>& x) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    sum += coef(i) * rbf_kernel(support.row(i).transpose(), x, gamma);
  }
  return sum - rho;
}

double default_gamma(const MatrixXd& x) {
  if (x.size() == 0) return 1.0;
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

BinarySvm svm_train_binary(const MatrixXd& x, const std::vector<int>& y_in, double c,
                           double gamma, double tolerance, std::size_t max_iterations) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  if (n < 2 || y_in.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("SVM needs at least two labeled rows");
  }
  if (!x.allFinite()) throw NumericalError("SVM features are not finite");
  if (!(c > 0.0) || !(gamma > 0.0)) throw ConfigError("SVM C and gamma must be positive");
  VectorXd y(n);
  bool has_pos = false;
  bool has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = y_in[static_cast<std::size_t>(i)];
    if (v != 1 && v != -1) throw ConfigError("binary SVM labels must be +1/-1");
    y(i) = v;
    (v > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw ConfigError("SVM needs both classes present");

  MatrixXd kern(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kern(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      kern(i, j) = kern(j, i) = rbf_kernel(x.row(i).transpose(), x.row(j).transpose(), gamma);
    }
  }
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * kern(i, j); };

  BinarySvm m;
  m.gamma = gamma;
  m.c = c;
  VectorXd alpha = VectorXd::Zero(n);
  VectorXd grad = VectorXd::Constant(n, -1.0);  // gradient of 0.5 a'Qa - e'a
  const std::size_t limit =
      max_iterations > 0 ? max_iterations : std::max<std::size_t>(100000, 100 * n);
  constexpr double kTau = 1e-12;
  auto in_up = [&](Eigen::Index t) {
    return (y(t) > 0 && alpha(t) < c) || (y(t) < 0 && alpha(t) > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < c);
  };
  auto objective = [&] { return 0.5 * alpha.dot(grad - VectorXd::Ones(n)); };
  m.objective_trace.push_back(0.0);

  std::size_t iter = 0;
  for (; iter < limit; ++iter) {
    Eigen::Index i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y(t) * grad(t) > g_max) {
        i = t;
        g_max = -y(t) * grad(t);
      }
    }
    Eigen::Index j = -1;
    double g_min = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y(t) * grad(t);
      g_min = std::min(g_min, v);
      const double b = g_max - v;
      if (i >= 0 && b > 0.0) {
        double a = kern(i, i) + kern(t, t) - 2.0 * kern(i, t);
        if (a <= 0.0) a = kTau;
        const double score = -(b * b) / a;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < tolerance) {
      m.converged = true;
      break;
    }

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    double quad = kern(i, i) + kern(j, j) - 2.0 * kern(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y(i) != y(j)) {
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = c - diff;
        }
      } else if (alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = sum - c;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > c) {
        if (alpha(j) > c) {
          alpha(j) = c;
          alpha(i) = sum - c;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double d_i = alpha(i) - old_i;
    const double d_j = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) grad(t) += q(t, i) * d_i + q(t, j) * d_j;
    m.objective_trace.push_back(objective());
  }
  m.iterations = iter;

  // rho: mean of y_i G_i over free duals, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    if (alpha(t) >= c) {
      if (y(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0.0) {
      if (y(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  m.rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);

  m.alpha = alpha;
  m.y = y;
  Eigen::Index n_sv = 0;
  for (Eigen::Index t = 0; t < n; ++t) n_sv += alpha(t) > 0.0 ? 1 : 0;
  m.support.resize(n_sv, x.cols());
  m.coef.resize(n_sv);
  for (Eigen::Index t = 0, s = 0; t < n; ++t) {
    if (alpha(t) > 0.0) {
      m.support.row(s) = x.row(t);
      m.coef(s) = alpha(t) * y(t);
      ++s;
    }
  }
  return m;
}

SvmModel svm_train(const MatrixXd& x, const std::vector<int>& labels, const SvmOptions& options) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) {
    throw ConfigError("SVM label count does not match feature rows");
  }
  SvmModel model;
  model.classes = distinct_labels(labels);
  if (model.classes.size() < 2) throw ConfigError("SVM needs at least two classes");
  model.gamma = options.gamma.value_or(default_gamma(x));
  model.c = options.c;

  auto one_vs_rest = [&](int positive) {
    std::vector<int> y(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == positive ? 1 : -1;
    return svm_train_binary(x, y, model.c, model.gamma, options.tolerance,
                            options.max_iterations);
  };
  if (model.classes.size() == 2) {
    model.machines.push_back(one_vs_rest(model.classes[0]));
  } else {
    for (int cls : model.classes) model.machines.push_back(one_vs_rest(cls));
  }
  for (const BinarySvm& m : model.machines) model.converged = model.converged && m.converged;
  return model;
}

std::vector<int> svm_predict(const SvmModel& model, const MatrixXd& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const VectorXd row = x.row(r).transpose();
    if (model.machines.size() == 1) {
      out[static_cast<std::size_t>(r)] =
          model.machines[0].decision(row) >= 0.0 ? model.classes[0] : model.classes[1];
      continue;
    }
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.machines.size(); ++c) {
      const double v = model.machines[c].decision(row);
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    out[static_cast<std::size_t>(r)] = model.classes[best];
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw ConfigError("accuracy needs equal, non-empty label vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace ecselect
