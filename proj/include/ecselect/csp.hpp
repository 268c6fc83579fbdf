#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ecselect/signal.hpp"

namespace ecselect {

struct CspModel {
  int n_pairs = 3;
  /// 2m x K; the first m rows maximize the class-A variance share, the last m class B.
  Eigen::MatrixXd filters;
  /// Every generalized eigenvalue, descending.
  Eigen::VectorXd eigenvalues;
  /// True when the composite covariance needed the +eps*I ridge.
  bool regularized = false;
};

struct FeatureMatrix {
  Eigen::MatrixXd features;  // trials x features
  std::vector<int> labels;
};

/// Channel covariance of one trial (per-channel mean removed), divided by its trace.
Eigen::MatrixXd normalized_covariance(const EpochSet& epochs, std::size_t trial);

/// Mean of the trace-normalized trial covariances over the listed trials.
Eigen::MatrixXd class_covariance(const EpochSet& epochs, const std::vector<std::size_t>& trials);

/// Solves C_a w = lambda (C_a + C_b) w from class-mean covariances.
CspModel csp_from_covariances(const Eigen::MatrixXd& c_a, const Eigen::MatrixXd& c_b, int n_pairs);

CspModel csp_fit(const EpochSet& class_a, const EpochSet& class_b, int n_pairs);

/// log(var(z_r) / sum_s var(z_s)) per projection z = W x, floored at log(1e-12).
Eigen::MatrixXd csp_features(const CspModel& model, const EpochSet& epochs);

/// One-vs-rest: one binary model per class (class vs. pooled rest).
struct MulticlassCsp {
  std::vector<int> classes;
  std::vector<CspModel> models;
};

/// Uses the labels stored on `epochs`; needs at least two classes.
MulticlassCsp csp_fit_multiclass(const EpochSet& epochs, int n_pairs);

/// Model blocks concatenated in class order: n_classes * 2m columns.
Eigen::MatrixXd csp_features(const MulticlassCsp& model, const EpochSet& epochs);

/// Sorted distinct labels.
std::vector<int> distinct_labels(const std::vector<int>& labels);

}  // namespace ecselect
