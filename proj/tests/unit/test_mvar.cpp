#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"

#include "ecselect/error.hpp"
#include "ecselect/mvar.hpp"
#include "ecselect/synth.hpp"

using namespace ecselect;
using Eigen::MatrixXd;

namespace {

VarModel var2_fixture() {
  VarModel m;
  m.order = 2;
  m.fs = 250.0;
  MatrixXd a1(3, 3);
  a1 << 0.5, 0.0, 0.0,
        0.4, 0.3, 0.0,
        0.0, -0.3, 0.4;
  MatrixXd a2(3, 3);
  a2 << -0.3, 0.0, 0.0,
         0.0, -0.2, 0.0,
         0.2, 0.0, -0.1;
  m.coeffs = {a1, a2};
  m.noise_cov = MatrixXd::Identity(3, 3);
  m.noise_cov(0, 1) = m.noise_cov(1, 0) = 0.2;
  return m;
}

VarModel scalar_ar(std::vector<double> a, double sigma2 = 1.0) {
  VarModel m;
  m.order = static_cast<int>(a.size());
  m.fs = 100.0;
  for (double v : a) m.coeffs.push_back(MatrixXd::Constant(1, 1, v));
  m.noise_cov = MatrixXd::Constant(1, 1, sigma2);
  return m;
}

}  // namespace

TEST_SUITE("mvar") {

TEST_CASE("white noise gives near-zero coefficients") {
  const EpochSet x = testutil::white_noise(50, 2, 500, 21);
  const VarModel m = fit_vieira_morf(x, 2);
  for (const MatrixXd& a : m.coeffs) CHECK(a.cwiseAbs().maxCoeff() < 0.05);
  CHECK(m.noise_cov(0, 0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("known VAR(2) is recovered") {
  const VarModel truth = var2_fixture();
  const EpochSet x = simulate_var(truth, 100, 500, 5, 200);
  const VarModel m = fit_vieira_morf(x, 2);
  for (int k = 0; k < 2; ++k) {
    CHECK((m.coeffs[k] - truth.coeffs[k]).cwiseAbs().maxCoeff() < 0.05);
  }
  CHECK((m.noise_cov - truth.noise_cov).norm() / truth.noise_cov.norm() < 0.1);
  CHECK(m.n_obs == 100 * 500);
}

TEST_CASE("scalar AR(1) a = 0.5") {
  const EpochSet x = simulate_var(scalar_ar({0.5}), 1, 20000, 8, 100);
  const VarModel m = fit_vieira_morf(x, 1);
  CHECK(m.coeffs[0](0, 0) >= 0.45);
  CHECK(m.coeffs[0](0, 0) <= 0.55);
}

TEST_CASE("identifiability floor and window bounds") {
  const EpochSet x = testutil::white_noise(1, 4, 30, 1);
  // 1 trial x (30 - 2) = 28 < 5 * 2 * 4 = 40
  CHECK_THROWS_AS(fit_vieira_morf(x, 2), ConfigError);
  const EpochSet y = testutil::white_noise(5, 2, 100, 2);
  CHECK_THROWS_AS(fit_vieira_morf(y, 2, SampleWindow{90, 20}), ConfigError);
}

TEST_CASE("singular data reports a numerical error") {
  const EpochSet flat = testutil::make_epochs(5, 2, 100, 100.0, [](auto, auto c, auto s) {
    return c == 0 ? std::sin(0.1 * s) : 0.0;
  });
  CHECK_THROWS_AS(fit_vieira_morf(flat, 2), NumericalError);
}

TEST_CASE("AIC penalty grows with order for a fixed residual covariance") {
  VarModel m = scalar_ar({0.0});
  m.noise_cov = MatrixXd::Identity(3, 3) * 2.0;
  m.n_obs = 1000;
  double prev = -1e300;
  for (int p = 1; p <= 6; ++p) {
    m.order = p;
    m.coeffs.assign(p, MatrixXd::Zero(3, 3));
    const double v = aic(m);
    CHECK(v > prev);
    CHECK(v == doctest::Approx(std::log(8.0) + 2.0 * p * 9 / 1000.0));
    prev = v;
  }
}

TEST_CASE("select_order: singleton and argmin rule") {
  const EpochSet x = simulate_var(scalar_ar({0.6, -0.3}), 20, 500, 3, 100);
  CHECK(select_order(x, {20}).chosen == 20);
  const OrderSelection sel = select_order(x, {1, 2, 3, 4, 5, 6});
  const auto best = std::min_element(sel.aic_values.begin(), sel.aic_values.end());
  CHECK(sel.chosen == sel.candidate_orders[static_cast<std::size_t>(best - sel.aic_values.begin())]);
  CHECK(sel.chosen >= 2);
  CHECK_THROWS_AS(select_order(x, {}), ConfigError);
}

TEST_CASE("select_order: unidentifiable candidates are excluded, all failing is an error") {
  const EpochSet x = testutil::white_noise(1, 2, 60, 4);
  const OrderSelection sel = select_order(x, {1, 10});
  CHECK(sel.failed[1]);
  CHECK(sel.chosen == 1);
  CHECK_THROWS_AS(select_order(x, {10, 12}), NumericalError);
}

TEST_CASE("stability examples") {
  VarModel zero = scalar_ar({0.0});
  zero.coeffs[0] = MatrixXd::Zero(2, 2);
  zero.noise_cov = MatrixXd::Identity(2, 2);
  StabilityResult s = stability_check(zero);
  CHECK(s.stable);
  CHECK(s.max_modulus == doctest::Approx(0.0));

  VarModel big = zero;
  big.coeffs[0] = 1.1 * MatrixXd::Identity(2, 2);
  s = stability_check(big);
  CHECK_FALSE(s.stable);
  CHECK(s.max_modulus == doctest::Approx(1.1).epsilon(1e-12));

  VarModel half = zero;
  half.coeffs[0] = 0.5 * MatrixXd::Identity(2, 2);
  s = stability_check(half);
  CHECK(s.stable);
  CHECK(s.max_modulus == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("companion matrix layout") {
  const VarModel m = var2_fixture();
  const MatrixXd f = companion_matrix(m);
  CHECK(f.rows() == 6);
  CHECK((f.block(0, 0, 3, 3) - m.coeffs[0]).norm() == 0.0);
  CHECK((f.block(0, 3, 3, 3) - m.coeffs[1]).norm() == 0.0);
  CHECK((f.block(3, 0, 3, 3) - MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK(f.block(3, 3, 3, 3).norm() == 0.0);
}

TEST_CASE("whiteness p-values are calibrated on white residuals") {
  int rejected = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const EpochSet x = testutil::white_noise(4, 2, 250, 1000 + r);
    const VarModel m = fit_vieira_morf(x, 1);
    if (whiteness_check(m, x, 10) < 0.05) ++rejected;
  }
  const double frac = static_cast<double>(rejected) / runs;
  CHECK(frac >= 0.01);
  CHECK(frac <= 0.10);
}

TEST_CASE("whiteness flags a misspecified order") {
  const EpochSet x = simulate_var(scalar_ar({0.9, -0.6, 0.4}), 5, 1000, 6, 100);
  const VarModel m = fit_vieira_morf(x, 1);
  CHECK(whiteness_check(m, x, 20) < 0.01);
  CHECK_THROWS_AS(whiteness_check(m, x, 1), ConfigError);
}

TEST_CASE("consistency checks") {
  const VarModel truth = var2_fixture();
  const EpochSet x = simulate_var(truth, 40, 500, 12, 200);
  const VarModel m = fit_vieira_morf(x, 2);
  CHECK(consistency_check(m, x, 3) >= 85.0);

  const EpochSet strong = simulate_var(scalar_ar({1.6, -0.8}), 20, 500, 13, 200);
  VarModel zero1 = scalar_ar({0.0, 0.0});
  CHECK(consistency_check(zero1, strong, 1) < 50.0);

  const MatrixXd r = lagged_covariances(x, 20);
  CHECK(percent_consistency(r, r) == 100.0);
}

TEST_CASE("validate_model bundles the diagnostics") {
  const EpochSet x = simulate_var(var2_fixture(), 20, 400, 14, 200);
  const VarModel m = fit_vieira_morf(x, 2);
  const ValidationReport v = validate_model(m, x, 20, 1);
  CHECK(v.stable == (v.max_eigen_modulus < 1.0));
  CHECK(v.whiteness_pvalue >= 0.0);
  CHECK(v.whiteness_pvalue <= 1.0);
  CHECK(v.percent_consistency > 80.0);
}

TEST_CASE("window counting and rounding") {
  CHECK(seconds_to_samples(0.5, 250.0) == 125);
  CHECK(seconds_to_samples(0.03, 250.0) == 8);
  CHECK(seconds_to_samples(0.001, 250.0) == 1);
  CHECK(window_count(750, 125, 8) == 79);
  CHECK(window_count(750, 750, 8) == 1);
  CHECK_THROWS_AS(window_count(100, 125, 8), ConfigError);
}

TEST_CASE("fit_windowed: counts, order and stationarity") {
  const VarModel truth = var2_fixture();
  const EpochSet x = simulate_var(truth, 60, 375, 15, 200);
  const WindowedVarModels w = fit_windowed(x, 2, 0.5, 0.2);
  CHECK(w.window_samples == 125);
  CHECK(w.step_samples == 50);
  CHECK(w.models.size() == window_count(375, 125, 50));
  CHECK(std::is_sorted(w.window_starts.begin(), w.window_starts.end()));
  MatrixXd mean = MatrixXd::Zero(3, 3);
  for (const VarModel& m : w.models) mean += m.coeffs[0];
  mean /= static_cast<double>(w.models.size());
  for (std::size_t i = 0; i < w.models.size(); ++i) {
    CHECK(w.valid[i]);
    CHECK(w.models[i].order == 2);
    CHECK((w.models[i].coeffs[0] - mean).cwiseAbs().maxCoeff() < 0.1);
  }
  const WindowedVarModels whole = fit_windowed(x, 2, 1.5, 0.03);
  CHECK(whole.models.size() == 1);
  CHECK_THROWS_AS(fit_windowed(x, 2, 2.0, 0.03), ConfigError);
  CHECK_THROWS_AS(fit_windowed(x, 40, 0.2, 0.03), ConfigError);
}

TEST_CASE("fits on random data are stable with symmetric PSD noise covariance") {
  for (int r = 0; r < 100; ++r) {
    const std::size_t k = 1 + static_cast<std::size_t>(r % 4);
    const int p = 1 + r % 5;
    const EpochSet x = testutil::white_noise(3, k, 120, 500 + r);
    const VarModel m = fit_vieira_morf(x, p);
    CHECK(stability_check(m).max_modulus < 1.0);
    CHECK((m.noise_cov - m.noise_cov.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m.noise_cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("AIC is invariant to trial order") {
  const EpochSet x = simulate_var(var2_fixture(), 9, 300, 16, 200);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[0], perm[4]);
  const double a = aic(fit_vieira_morf(x, 3));
  const double b = aic(fit_vieira_morf(select_trials(x, perm), 3));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("fit is equivariant under channel permutation") {
  const EpochSet x = simulate_var(var2_fixture(), 10, 400, 17, 200);
  const std::vector<std::size_t> perm{2, 0, 1};
  const VarModel m = fit_vieira_morf(x, 2);
  const VarModel mp = fit_vieira_morf(select_channel_subset(x, perm), 2);
  for (int k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(mp.coeffs[k](i, j) - m.coeffs[k](perm[i], perm[j])) < 1e-10);
      }
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(mp.noise_cov(i, j) - m.noise_cov(perm[i], perm[j])) < 1e-10);
    }
  }
}

TEST_CASE("simulation is deterministic per seed with independent trial streams") {
  const VarModel truth = var2_fixture();
  const EpochSet a = simulate_var(truth, 3, 50, 99, 20);
  const EpochSet b = simulate_var(truth, 3, 50, 99, 20);
  CHECK(a.data() == b.data());
  const EpochSet more = simulate_var(truth, 5, 50, 99, 20);
  CHECK(std::equal(a.data().begin(), a.data().end(), more.data().begin()));
  const EpochSet other = simulate_var(truth, 3, 50, 100, 20);
  CHECK(a.data() != other.data());
}

}  // TEST_SUITE
