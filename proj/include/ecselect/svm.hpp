#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace ecselect {

struct SvmOptions {
  double c = 1.0;
  /// Defaults to 1 / (n_features * var(features)).
  std::optional<double> gamma;
  double tolerance = 1e-3;
  /// 0 selects max(100000, 100 n).
  std::size_t max_iterations = 0;
};

/// Soft-margin RBF machine; decision(x) = sum_i coef_i k(sv_i, x) - rho.
struct BinarySvm {
  Eigen::MatrixXd support;   // support vectors as rows
  Eigen::VectorXd coef;      // alpha_i y_i for each support vector
  double rho = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  /// Training duals for every input row (0 off the support set) and their labels.
  Eigen::VectorXd alpha;
  Eigen::VectorXd y;
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  bool converged = false;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& u,
                  const Eigen::Ref<const Eigen::VectorXd>& v, double gamma);

/// SMO with second-order working-set selection; y entries are +1 or -1.
BinarySvm svm_train_binary(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                           double gamma, double tolerance = 1e-3,
                           std::size_t max_iterations = 0);

double default_gamma(const Eigen::MatrixXd& x);

struct SvmModel {
  std::vector<int> classes;
  /// One machine for two classes (positive = classes[0]); one per class otherwise.
  std::vector<BinarySvm> machines;
  double gamma = 1.0;
  double c = 1.0;
  bool converged = true;
};

SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                   const SvmOptions& options = {});

/// One-vs-rest argmax of decision values; ties go to the lower class id.
std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& x);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace ecselect
