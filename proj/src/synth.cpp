#include "ecselect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ecselect/error.hpp"

namespace ecselect {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), tag};
  return std::mt19937_64(seq);
}

bool has_edge(const std::vector<Edge>& edges, std::size_t to, std::size_t from) {
  return std::find(edges.begin(), edges.end(), Edge{to, from}) != edges.end();
}

std::vector<ChannelMeta> named_channels(const std::vector<std::string>& names, std::size_t k) {
  if (names.empty()) {
    std::vector<std::string> generated;
    for (std::size_t c = 0; c < k; ++c) generated.push_back("X" + std::to_string(c + 1));
    return make_channels(generated);
  }
  if (names.size() != k) throw ConfigError("channel_names length must equal n_channels");
  return make_channels(names);
}

}  // namespace

VarModel realize_model(const GroundTruthSpec& spec) {
  const auto k = static_cast<Eigen::Index>(spec.n_channels);
  if (k < 1 || spec.order < 1) throw ConfigError("ground truth needs n_channels >= 1, order >= 1");
  VarModel model;
  model.order = spec.order;
  model.fs = spec.fs;
  model.noise_cov = spec.noise_cov.size() == 0 ? MatrixXd::Identity(k, k) : spec.noise_cov;
  if (model.noise_cov.rows() != k || model.noise_cov.cols() != k) {
    throw ConfigError("noise_cov must be n_channels x n_channels");
  }
  if (spec.edges) {
    for (const Edge& e : *spec.edges) {
      if (e.first >= spec.n_channels || e.second >= spec.n_channels || e.first == e.second) {
        throw ConfigError("edge (" + std::to_string(e.first) + " <- " + std::to_string(e.second) +
                          ") is not an off-diagonal pair");
      }
    }
  }

  if (!spec.coeffs.empty()) {
    if (spec.coeffs.size() != static_cast<std::size_t>(spec.order)) {
      throw ConfigError("coeffs must hold one matrix per lag");
    }
    model.coeffs = spec.coeffs;
    if (spec.edges) {
      for (std::size_t i = 0; i < spec.n_channels; ++i) {
        for (std::size_t j = 0; j < spec.n_channels; ++j) {
          if (i == j) continue;
          bool nonzero = false;
          for (const MatrixXd& a : model.coeffs) {
            nonzero = nonzero || a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0;
          }
          if (nonzero != has_edge(*spec.edges, i, j)) {
            throw ConfigError("edge list inconsistent with coefficients at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
          }
        }
      }
    }
    model.validate();
    return model;
  }

  if (!(spec.target_radius > 0.0) || spec.target_radius >= 1.0) {
    throw ConfigError("target_radius must be in (0, 1)");
  }
  std::mt19937_64 rng = stream(spec.seed, 0, 0xc0ef);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(k * spec.order)));
  for (int lag = 0; lag < spec.order; ++lag) {
    MatrixXd a = MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const bool allowed = i == j || !spec.edges ||
                             has_edge(*spec.edges, static_cast<std::size_t>(i),
                                      static_cast<std::size_t>(j));
        const double v = normal(rng);
        if (allowed) a(i, j) = v;
      }
    }
    model.coeffs.push_back(std::move(a));
  }
  const double r = stability_check(model).max_modulus;
  if (r > 1e-12) {
    const double scale = spec.target_radius / r;
    double factor = 1.0;
    for (MatrixXd& a : model.coeffs) {
      factor *= scale;
      a *= factor;
    }
  }
  model.validate();
  return model;
}

EpochSet gen_var_epochs(const GroundTruthSpec& spec, std::size_t n_trials, std::size_t n_samples,
                        std::size_t burn_in) {
  const VarModel model = realize_model(spec);
  const StabilityResult st = stability_check(model);
  if (!st.stable) {
    throw ConfigError("unstable ground-truth spec (spectral radius " +
                      std::to_string(st.max_modulus) + ")");
  }
  if (burn_in < 10 * static_cast<std::size_t>(spec.order)) {
    throw ConfigError("burn_in must be at least 10 * order");
  }
  EpochSet sim = simulate_var(model, n_trials, n_samples, spec.seed, burn_in);
  return EpochSet(sim.data(), n_trials, named_channels(spec.channel_names, spec.n_channels),
                  n_samples, spec.fs);
}

VarModel labeled_routing_model(const LabeledDatasetSpec& spec) {
  const auto k = static_cast<Eigen::Index>(spec.n_channels);
  std::mt19937_64 rng = stream(spec.structure_seed, 0, 0x7a11);
  std::uniform_real_distribution<double> peak(8.0, 25.0);
  std::bernoulli_distribution sign;
  VarModel model;
  model.order = 2;
  model.fs = spec.fs;
  model.noise_cov = MatrixXd::Identity(k, k);
  model.coeffs.assign(2, MatrixXd::Zero(k, k));
  const double radius = spec.pole_radius;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double theta = 2.0 * std::numbers::pi * peak(rng) / spec.fs;
    model.coeffs[0](c, c) = 2.0 * radius * std::cos(theta);
    model.coeffs[1](c, c) = -radius * radius;
  }
  std::vector<bool> driver(spec.n_channels, false);
  for (std::size_t c : spec.informative) {
    if (c >= spec.n_channels) throw ConfigError("informative channel out of range");
    driver[c] = true;
  }
  for (std::size_t j = 0; j < spec.n_channels; ++j) {
    if (!driver[j]) continue;
    for (std::size_t i = 0; i < spec.n_channels; ++i) {
      if (driver[i]) continue;
      model.coeffs[0](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          sign(rng) ? spec.coupling : -spec.coupling;
    }
  }
  return model;
}

EpochSet gen_labeled_csp_dataset(const LabeledDatasetSpec& spec) {
  const std::size_t k = spec.n_channels;
  if (k < 1 || spec.n_trials_per_class < 1 || spec.n_samples < 1) {
    throw ConfigError("labeled dataset needs channels, trials and samples");
  }
  if (!(spec.variance_ratio > 0.0)) throw ConfigError("variance_ratio must be positive");
  for (std::size_t c : spec.informative) {
    if (c >= k) throw ConfigError("informative channel " + std::to_string(c) + " out of range");
  }

  std::optional<VarModel> routing;
  if (spec.route_through_var) {
    routing = labeled_routing_model(spec);
    if (!stability_check(*routing).stable) throw ConfigError("routing model is unstable");
  }
  const std::size_t n_trials = 2 * spec.n_trials_per_class;
  const std::size_t burn = routing ? spec.burn_in : 0;
  const std::size_t total = burn + spec.n_samples;
  std::vector<int> labels(n_trials);
  std::vector<double> data(n_trials * k * spec.n_samples);
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t t = 0; t < n_trials; ++t) {
    const int label = static_cast<int>(t % 2);
    labels[t] = label;
    VectorXd sd = VectorXd::Ones(kk);
    // The boosted class alternates along the informative list. A uniform boost would
    // vanish once only informative channels are kept, since CSP features are scale-free.
    for (std::size_t q = 0; q < spec.informative.size(); ++q) {
      if (static_cast<int>(q % 2) == label) {
        sd(static_cast<Eigen::Index>(spec.informative[q])) = std::sqrt(spec.variance_ratio);
      }
    }
    std::mt19937_64 rng = stream(spec.seed, t, 0x1abe);
    std::normal_distribution<double> normal;
    MatrixXd x(kk, static_cast<Eigen::Index>(total));
    for (std::size_t s = 0; s < total; ++s) {
      VectorXd v(kk);
      for (Eigen::Index c = 0; c < kk; ++c) v(c) = sd(c) * normal(rng);
      if (routing) {
        for (std::size_t lag = 1; lag <= 2 && lag <= s; ++lag) {
          v.noalias() += routing->coeffs[lag - 1] * x.col(static_cast<Eigen::Index>(s - lag));
        }
      }
      x.col(static_cast<Eigen::Index>(s)) = v;
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t s = 0; s < spec.n_samples; ++s) {
        data[(t * k + c) * spec.n_samples + s] =
            x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(burn + s));
      }
    }
  }
  return EpochSet(std::move(data), n_trials, named_channels({}, k), spec.n_samples, spec.fs,
                  std::move(labels));
}

MatrixXd monte_carlo_process_covariance(const VarModel& model, std::size_t n_samples,
                                        std::uint64_t seed, std::size_t burn_in) {
  if (!stability_check(model).stable) throw ConfigError("unstable model");
  const std::size_t p = static_cast<std::size_t>(model.order);
  if (n_samples < 2) throw ConfigError("need at least 2 samples");
  const EpochSet sim = simulate_var(model, 1, n_samples + p - 1, seed, burn_in);
  const auto k = static_cast<Eigen::Index>(model.n_channels());
  const auto dim = k * static_cast<Eigen::Index>(p);
  MatrixXd sum = MatrixXd::Zero(dim, dim);
  VectorXd mean = VectorXd::Zero(dim);
  VectorXd state(dim);
  for (std::size_t t = p - 1; t < n_samples + p - 1; ++t) {
    for (std::size_t lag = 0; lag < p; ++lag) {
      for (Eigen::Index c = 0; c < k; ++c) {
        state(static_cast<Eigen::Index>(lag) * k + c) =
            sim.at(0, static_cast<std::size_t>(c), t - lag);
      }
    }
    mean += state;
    sum.noalias() += state * state.transpose();
  }
  const double n = static_cast<double>(n_samples);
  mean /= n;
  return (sum - n * mean * mean.transpose()) / (n - 1.0);
}

MatrixXd monte_carlo_process_covariance(const GroundTruthSpec& spec, std::size_t n_samples) {
  const VarModel model = realize_model(spec);
  return monte_carlo_process_covariance(model, n_samples, spec.seed, 100 * model.order + 1000);
}

nlohmann::json to_json(const GroundTruthSpec& spec) {
  nlohmann::json j = {{"n_channels", spec.n_channels}, {"order", spec.order},
                      {"fs", spec.fs},                 {"target_radius", spec.target_radius},
                      {"seed", spec.seed}};
  auto matrix = [](const MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(m(r, c));
    }
    return rows;
  };
  if (!spec.coeffs.empty()) {
    nlohmann::json lags = nlohmann::json::array();
    for (const MatrixXd& a : spec.coeffs) lags.push_back(matrix(a));
    j["coeffs"] = std::move(lags);
  }
  if (spec.noise_cov.size() > 0) j["noise_cov"] = matrix(spec.noise_cov);
  if (spec.edges) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : *spec.edges) edges.push_back({e.first, e.second});
    j["edges"] = std::move(edges);
  }
  if (!spec.channel_names.empty()) j["channel_names"] = spec.channel_names;
  return j;
}

GroundTruthSpec ground_truth_from_json(const nlohmann::json& j) {
  GroundTruthSpec spec;
  auto matrix = [](const nlohmann::json& rows, Eigen::Index k) {
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != k) {
      throw ConfigError("matrix must have n_channels rows");
    }
    MatrixXd m(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k) {
        throw ConfigError("matrix must have n_channels columns");
      }
      for (Eigen::Index c = 0; c < k; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  };
  try {
    spec.n_channels = j.at("n_channels").get<std::size_t>();
    spec.order = j.at("order").get<int>();
    spec.fs = j.value("fs", spec.fs);
    spec.target_radius = j.value("target_radius", spec.target_radius);
    spec.seed = j.value("seed", spec.seed);
    const auto k = static_cast<Eigen::Index>(spec.n_channels);
    if (j.contains("coeffs")) {
      for (const auto& lag : j["coeffs"]) spec.coeffs.push_back(matrix(lag, k));
    }
    if (j.contains("noise_cov")) spec.noise_cov = matrix(j["noise_cov"], k);
    if (j.contains("edges")) {
      std::vector<Edge> edges;
      for (const auto& e : j["edges"]) {
        edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
      }
      spec.edges = std::move(edges);
    }
    spec.channel_names = j.value("channel_names", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed ground-truth spec: ") + e.what());
  }
  return spec;
}

nlohmann::json to_json(const LabeledDatasetSpec& spec) {
  return {{"n_channels", spec.n_channels},
          {"informative", spec.informative},
          {"variance_ratio", spec.variance_ratio},
          {"n_trials_per_class", spec.n_trials_per_class},
          {"n_samples", spec.n_samples},
          {"fs", spec.fs},
          {"seed", spec.seed},
          {"route_through_var", spec.route_through_var},
          {"structure_seed", spec.structure_seed},
          {"coupling", spec.coupling},
          {"pole_radius", spec.pole_radius},
          {"burn_in", spec.burn_in}};
}

LabeledDatasetSpec labeled_spec_from_json(const nlohmann::json& j) {
  LabeledDatasetSpec s;
  try {
    s.n_channels = j.value("n_channels", s.n_channels);
    s.informative = j.value("informative", s.informative);
    s.variance_ratio = j.value("variance_ratio", s.variance_ratio);
    s.n_trials_per_class = j.value("n_trials_per_class", s.n_trials_per_class);
    s.n_samples = j.value("n_samples", s.n_samples);
    s.fs = j.value("fs", s.fs);
    s.seed = j.value("seed", s.seed);
    s.route_through_var = j.value("route_through_var", s.route_through_var);
    s.structure_seed = j.value("structure_seed", s.structure_seed);
    s.coupling = j.value("coupling", s.coupling);
    s.pole_radius = j.value("pole_radius", s.pole_radius);
    s.burn_in = j.value("burn_in", s.burn_in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed labeled dataset spec: ") + e.what());
  }
  return s;
}

}  // namespace ecselect
