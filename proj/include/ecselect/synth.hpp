#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ecselect/mvar.hpp"
#include "ecselect/signal.hpp"

namespace ecselect {

/// (to, from): coefficient entry A_k(to, from) may be nonzero.
using Edge = std::pair<std::size_t, std::size_t>;

struct GroundTruthSpec {
  std::size_t n_channels = 3;
  int order = 2;
  double fs = 250.0;
  /// Explicit coefficients (one K x K matrix per lag); empty means draw at random.
  std::vector<Eigen::MatrixXd> coeffs;
  /// Companion spectral radius the random draw is rescaled to.
  double target_radius = 0.9;
  /// Empty means identity.
  Eigen::MatrixXd noise_cov;
  /// Off-diagonal sparsity pattern. Absent: dense random draw, no check on explicit
  /// coefficients. Present: random draws fill only these entries and the diagonal,
  /// and explicit coefficients must match it.
  std::optional<std::vector<Edge>> edges;
  std::uint64_t seed = 0;
  std::vector<std::string> channel_names;
};

/// Concrete model for the spec: explicit coefficients, or a seeded random draw whose
/// lag-k matrices are scaled by (target / r)^k so the companion radius lands on target.
VarModel realize_model(const GroundTruthSpec& spec);

/// Seeded forward simulation with one Gaussian stream per trial. Throws ConfigError
/// for an unstable model or burn_in < 10 * order.
EpochSet gen_var_epochs(const GroundTruthSpec& spec, std::size_t n_trials, std::size_t n_samples,
                        std::size_t burn_in);

struct LabeledDatasetSpec {
  std::size_t n_channels = 8;
  std::vector<std::size_t> informative{0, 1, 2};
  /// Innovation variance ratio between the boosted and the other class on informative
  /// channels. Informative channel q (position in the list) is boosted in class q % 2.
  double variance_ratio = 4.0;
  std::size_t n_trials_per_class = 100;
  std::size_t n_samples = 500;
  double fs = 250.0;
  /// Trial noise stream seed.
  std::uint64_t seed = 0;
  /// Route informative channels through a VAR in which they drive every other channel.
  bool route_through_var = false;
  /// Seed for the routing model's resonances and coupling signs (shared by train/test).
  std::uint64_t structure_seed = 1;
  double coupling = 0.35;
  /// Pole radius of every channel's resonance in the routing model.
  double pole_radius = 0.5;
  std::size_t burn_in = 200;
};

/// The routing VAR(2) for a labeled spec (independent resonators plus driver couplings).
VarModel labeled_routing_model(const LabeledDatasetSpec& spec);

/// Labels alternate 0, 1, 0, ... by trial.
EpochSet gen_labeled_csp_dataset(const LabeledDatasetSpec& spec);

/// Empirical covariance of stacked states [x_t; ...; x_{t-p+1}] from one long run.
Eigen::MatrixXd monte_carlo_process_covariance(const VarModel& model, std::size_t n_samples,
                                               std::uint64_t seed, std::size_t burn_in = 0);
Eigen::MatrixXd monte_carlo_process_covariance(const GroundTruthSpec& spec,
                                               std::size_t n_samples);

nlohmann::json to_json(const GroundTruthSpec& spec);
GroundTruthSpec ground_truth_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabeledDatasetSpec& spec);
LabeledDatasetSpec labeled_spec_from_json(const nlohmann::json& j);

}  // namespace ecselect
