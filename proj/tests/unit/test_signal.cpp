#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "ecselect/error.hpp"
#include "ecselect/signal.hpp"

using namespace ecselect;

TEST_SUITE("signal") {

TEST_CASE("EEGB round trip of a 1x2x4 set") {
  EpochSet e = testutil::make_epochs(1, 2, 4, 100.0, [](auto, auto c, auto s) {
    return static_cast<double>(static_cast<float>(0.1 * (c + 1) * (s + 1)));
  });
  std::stringstream buf;
  write_eegb(e, buf);
  const std::string bytes = buf.str();
  const EpochSet back = read_eegb(buf);
  CHECK(back.n_trials() == 1);
  CHECK(back.n_channels() == 2);
  CHECK(back.n_samples() == 4);
  CHECK(back.fs() == 100.0);
  CHECK(back.data() == e.data());

  std::stringstream again;
  write_eegb(back, again);
  CHECK(again.str() == bytes);
}

TEST_CASE("EEGB layout: magic, version, header length, JSON, float32 payload") {
  EpochSet e = testutil::make_epochs(2, 1, 3, 250.0, [](auto t, auto, auto s) {
    return static_cast<double>(t * 10 + s);
  });
  e.set_labels(std::vector<int>{0, 1});
  std::stringstream buf;
  write_eegb(e, buf);
  const std::string b = buf.str();
  REQUIRE(b.size() > 12);
  CHECK(b.substr(0, 4) == "EEGB");
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
    return v;
  };
  CHECK(u32(4) == 1u);
  const std::uint32_t hlen = u32(8);
  const auto header = nlohmann::json::parse(b.substr(12, hlen));
  CHECK(header["fs"] == 250.0);
  CHECK(header["n_trials"] == 2);
  CHECK(header["n_samples"] == 3);
  CHECK(header["channels"] == std::vector<std::string>{"X1"});
  CHECK(header["labels"] == std::vector<int>{0, 1});
  CHECK(b.size() == 12 + hlen + 6 * 4);
  // Trial 1, sample 2 is the last value: 12.0f.
  std::uint32_t last = u32(12 + hlen + 5 * 4);
  CHECK(std::bit_cast<float>(last) == 12.0f);
}

TEST_CASE("EEGB payload shorter than the header declares") {
  EpochSet e(10, testutil::channels(2), 8, 100.0);
  std::stringstream buf;
  write_eegb(e, buf);
  std::string b = buf.str();
  b.resize(b.size() - 2 * 8 * 4);  // drop one trial
  std::stringstream cut(b);
  CHECK_THROWS_WITH_AS(read_eegb(cut), doctest::Contains("dimension mismatch"), FormatError);
}

TEST_CASE("EEGB rejects bad magic and non-finite samples") {
  std::stringstream bad("EEGX\x01\0\0\0");
  CHECK_THROWS_AS(read_eegb(bad), FormatError);

  EpochSet e(1, testutil::channels(1), 2, 100.0);
  std::stringstream buf;
  write_eegb(e, buf);
  std::string b = buf.str();
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(b.data() + b.size() - 4, &nan, 4);
  std::stringstream poisoned(b);
  CHECK_THROWS_AS(read_eegb(poisoned), FormatError);
}

TEST_CASE("smallest CSV: header t,C3,C4 and three rows") {
  std::stringstream csv("t,C3,C4\n0,1,2\n0.004,3,4\n0.008,5,6\n");
  const EpochSet e = read_csv(csv);
  CHECK(e.n_trials() == 1);
  CHECK(e.n_channels() == 2);
  CHECK(e.n_samples() == 3);
  CHECK(e.fs() == doctest::Approx(250.0));
  CHECK(e.channel_names() == std::vector<std::string>{"C3", "C4"});
  CHECK(e.at(0, 1, 2) == 6.0);
  CHECK(e.channels()[0].position.has_value());
}

TEST_CASE("CSV round trip and malformed rows") {
  EpochSet e = testutil::make_epochs(1, 3, 5, 128.0, [](auto, auto c, auto s) {
    return std::sin(0.3 * s + c);
  });
  std::stringstream buf;
  write_csv(e, buf);
  const EpochSet back = read_csv(buf);
  CHECK(back.data() == e.data());
  CHECK(back.fs() == doctest::Approx(128.0));

  std::stringstream ragged("t,a,b\n0,1\n");
  CHECK_THROWS_AS(read_csv(ragged), FormatError);
  std::stringstream no_header("0,1,2\n");
  CHECK_THROWS_AS(read_csv(no_header), FormatError);
}

TEST_CASE("segment") {
  EpochSet e = testutil::make_epochs(2, 2, 1000, 250.0, [](auto t, auto c, auto s) {
    return static_cast<double>(t * 10000 + c * 1000 + s);
  });
  e.set_labels(std::vector<int>{3, 4});
  const EpochSet full = segment(e, 0, 1000);
  CHECK(full.data() == e.data());
  const EpochSet part = segment(e, 625, 1375 > 1000 ? 1000 : 1375);
  CHECK(part.n_samples() == 375);
  const EpochSet mid = segment(testutil::make_epochs(1, 1, 1500, 250.0, [](auto, auto, auto s) {
                                   return static_cast<double>(s);
                                 }),
                                 625, 1375);
  CHECK(mid.n_samples() == 750);
  CHECK(mid.at(0, 0, 0) == 625.0);
  CHECK(part.labels() == e.labels());
  CHECK_THROWS_AS(segment(e, 5, 5), ConfigError);
  CHECK_THROWS_AS(segment(e, 0, 1001), ConfigError);
}

TEST_CASE("ensemble_normalize examples") {
  EpochSet two = testutil::make_epochs(2, 1, 1, 100.0, [](auto t, auto, auto) {
    return t == 0 ? 1.0 : 3.0;
  });
  const EpochSet z = ensemble_normalize(two);
  CHECK(z.at(0, 0, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
  CHECK(z.at(1, 0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  const EpochSet constant = testutil::make_epochs(4, 2, 3, 100.0, [](auto, auto, auto) {
    return 7.5;
  });
  const EpochSet zc = ensemble_normalize(constant);
  for (double v : zc.data()) CHECK(v == 0.0);

  CHECK_THROWS_AS(ensemble_normalize(testutil::white_noise(1, 2, 10, 1)), ConfigError);
}

TEST_CASE("ensemble_normalize: zero mean, unit std, idempotent, trial-permutation equivariant") {
  const EpochSet x = testutil::white_noise(7, 3, 20, 11);
  const EpochSet z = ensemble_normalize(x);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t s = 0; s < 20; ++s) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 7; ++t) mean += z.at(t, c, s);
      mean /= 7.0;
      double var = 0.0;
      for (std::size_t t = 0; t < 7; ++t) var += (z.at(t, c, s) - mean) * (z.at(t, c, s) - mean);
      CHECK(std::abs(mean) < 1e-10);
      CHECK(std::abs(std::sqrt(var / 6.0) - 1.0) < 1e-10);
    }
  }
  const EpochSet zz = ensemble_normalize(z);
  for (std::size_t i = 0; i < z.data().size(); ++i) CHECK(std::abs(zz.data()[i] - z.data()[i]) < 1e-9);

  const std::vector<std::size_t> perm{3, 0, 6, 1, 5, 2, 4};
  const EpochSet zp = ensemble_normalize(select_trials(x, perm));
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t s = 0; s < 20; ++s) {
        CHECK(zp.at(t, c, s) == doctest::Approx(z.at(perm[t], c, s)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("channel and trial selection") {
  EpochSet e = testutil::make_epochs(3, 4, 2, 100.0, [](auto t, auto c, auto s) {
    return static_cast<double>(100 * t + 10 * c + s);
  });
  e.set_labels(std::vector<int>{5, 6, 7});
  const std::vector<std::size_t> pick{2, 0};
  const EpochSet sub = select_channel_subset(e, pick);
  CHECK(sub.channel_names() == std::vector<std::string>{"X3", "X1"});
  CHECK(sub.channels()[0].index == 0);
  CHECK(sub.at(1, 0, 1) == 121.0);
  const std::vector<std::size_t> trials{2};
  const EpochSet one = select_trials(e, trials);
  CHECK(one.labels() == std::optional<std::vector<int>>(std::vector<int>{7}));
  const std::vector<std::size_t> bad{4};
  CHECK_THROWS_AS(select_channel_subset(e, bad), ConfigError);
  CHECK_THROWS_AS(select_trials(e, bad), ConfigError);
}

TEST_CASE("EpochSet invariants") {
  CHECK_THROWS_AS(EpochSet(std::vector<double>(3), 1, testutil::channels(1), 4, 100.0), FormatError);
  CHECK_THROWS_AS(EpochSet(1, make_channels({"C3", "C3"}), 4, 100.0), FormatError);
  CHECK_THROWS_AS(EpochSet(2, testutil::channels(1), 4, 100.0, std::vector<int>{1}), FormatError);
  CHECK_THROWS_AS(EpochSet(1, testutil::channels(1), 4, 0.0), FormatError);
}

TEST_CASE("standard electrode positions") {
  const auto cz = standard_position("Cz");
  REQUIRE(cz);
  CHECK(std::abs((*cz)[0]) < 1e-12);
  CHECK(std::abs((*cz)[1]) < 1e-12);
  const auto c3 = standard_position("C3");
  const auto c4 = standard_position("C4");
  REQUIRE(c3);
  REQUIRE(c4);
  CHECK((*c3)[0] < 0.0);
  CHECK((*c4)[0] == doctest::Approx(-(*c3)[0]));
  const auto fpz = standard_position("Fpz");
  REQUIRE(fpz);
  CHECK((*fpz)[1] > 0.5);
  CHECK_FALSE(standard_position("X1").has_value());
}

TEST_CASE("band validation") {
  CHECK_NOTHROW((BandSpec{8.0, 30.0, "b"}.validate(250.0)));
  CHECK_THROWS_AS((BandSpec{8.0, 125.0, "b"}.validate(250.0)), ConfigError);
  CHECK_THROWS_AS((BandSpec{30.0, 8.0, "b"}.validate(250.0)), ConfigError);
  CHECK_THROWS_AS((BandSpec{0.0, 8.0, "b"}.validate(250.0)), ConfigError);
}

}  // TEST_SUITE
