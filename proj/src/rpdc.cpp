// Stationary process covariance and renormalized partial directed coherence.
#include <cmath>
#include <cstdio>
#include <numbers>

#include "ecselect/error.hpp"
#include "ecselect/spectral.hpp"

namespace ecselect {

using Eigen::MatrixXd;

ProcessCovariance process_covariance(const VarModel& model) {
  const StabilityResult st = stability_check(model);
  if (!st.stable) {
    throw NumericalError("unstable model has no stationary covariance (spectral radius " +
                         std::to_string(st.max_modulus) + ")");
  }
  const Eigen::Index k = model.n_channels();
  const MatrixXd f1 = companion_matrix(model);
  const Eigen::Index n = f1.rows();
  MatrixXd q = MatrixXd::Zero(n, n);
  q.topLeftCorner(k, k) = model.noise_cov;

  // Doubling: after m steps r = sum_{t < 2^m} F^t Q F'^t.
  auto doubling = [&](const MatrixXd& rhs) {
    MatrixXd f = f1;
    MatrixXd r = rhs;
    for (int iter = 0; iter < 64; ++iter) {
      const MatrixXd inc = f * r * f.transpose();
      r += inc;
      r = 0.5 * (r + r.transpose()).eval();
      f = (f * f).eval();
      if (inc.norm() <= 1e-14 * r.norm()) break;
    }
    return r;
  };
  MatrixXd r = doubling(q);
  // Near-unit-root companions lose digits in the sum; the map is linear, so
  // a few refinement passes on the residual recover them.
  double residual = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    const MatrixXd frf = f1 * r * f1.transpose();
    const MatrixXd e = frf + q - r;
    residual = e.norm() / (r.norm() + frf.norm() + q.norm());
    if (residual < 1e-12) break;
    r += doubling(0.5 * (e + e.transpose()));
  }
  if (!(residual < 1e-10)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", residual);
    throw NumericalError(std::string("Lyapunov doubling did not converge (relative residual ") +
                         buf + ")");
  }
  return {r};
}

namespace {

// Pseudo-inverse of a symmetric 2x2 matrix, dropping eigenvalues below
// 1e-12 of the largest.
Eigen::Matrix2d pinv_sym2(const Eigen::Matrix2d& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(v);
  const Eigen::Vector2d vals = eig.eigenvalues();
  const double top = vals.cwiseAbs().maxCoeff();
  Eigen::Vector2d inv = Eigen::Vector2d::Zero();
  for (int i = 0; i < 2; ++i) {
    if (top > 0.0 && std::abs(vals(i)) > 1e-12 * top) inv(i) = 1.0 / vals(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

MetricSpectrum rpdc(const SpectralMatrices& spec, const VarModel& model,
                    const ProcessCovariance& cov) {
  const Eigen::Index k = model.n_channels();
  const Eigen::Index p = model.order;
  if (cov.r.rows() != k * p) throw ConfigError("process covariance has wrong size");
  const Eigen::LDLT<MatrixXd> ldlt(cov.r);
  if (ldlt.info() != Eigen::Success) throw NumericalError("process covariance not invertible");
  const MatrixXd r_inv = ldlt.solve(MatrixXd::Identity(k * p, k * p));

  MetricSpectrum out;
  out.reserve(spec.grid.size());
  for (std::size_t fi = 0; fi < spec.grid.size(); ++fi) {
    const double omega = 2.0 * std::numbers::pi * spec.grid.freqs[fi] / model.fs;
    // Columns u_k = (cos wk, -sin wk): with A(f) = I - sum A_k e^{-iwk} the pair
    // (Re A_ij, Im A_ij) is -U a_ij, so V = Sigma_ii U R^-1_jj U'.
    MatrixXd u(2, p);
    for (Eigen::Index lag = 1; lag <= p; ++lag) {
      u(0, lag - 1) = std::cos(omega * lag);
      u(1, lag - 1) = -std::sin(omega * lag);
    }
    MatrixXd lambda(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      MatrixXd r_jj(p, p);
      for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b < p; ++b) r_jj(a, b) = r_inv(a * k + j, b * k + j);
      }
      const Eigen::Matrix2d base = u * r_jj * u.transpose();
      for (Eigen::Index i = 0; i < k; ++i) {
        const std::complex<double> aij = spec.a[fi](i, j);
        const Eigen::Vector2d qv(aij.real(), aij.imag());
        const Eigen::Matrix2d v = model.noise_cov(i, i) * base;
        lambda(i, j) = std::max(0.0, qv.dot(pinv_sym2(v) * qv));
      }
    }
    out.push_back(std::move(lambda));
  }
  return out;
}

}  // namespace ecselect
