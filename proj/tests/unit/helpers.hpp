#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ecselect/signal.hpp"

namespace testutil {

inline std::vector<ecselect::ChannelMeta> channels(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < k; ++c) names.push_back("X" + std::to_string(c + 1));
  return ecselect::make_channels(names);
}

/// Epochs filled from fn(trial, channel, sample).
inline ecselect::EpochSet make_epochs(std::size_t trials, std::size_t k, std::size_t n, double fs,
                                      const std::function<double(std::size_t, std::size_t,
                                                                 std::size_t)>& fn) {
  ecselect::EpochSet e(trials, channels(k), n, fs);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t s = 0; s < n; ++s) e.at(t, c, s) = fn(t, c, s);
    }
  }
  return e;
}

inline ecselect::EpochSet white_noise(std::size_t trials, std::size_t k, std::size_t n,
                                      std::uint64_t seed, double fs = 250.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  return make_epochs(trials, k, n, fs, [&](std::size_t, std::size_t, std::size_t) {
    return normal(rng);
  });
}

inline std::filesystem::path tmp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(ECSELECT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testutil
