#include "ecselect/oracle.hpp"

#include <stdexcept>

namespace ecselect::oracle {

IcecReport oracle_icec(const Table& c, double top_fraction) {
  const std::size_t k = c.size();
  if (k < 2) throw std::invalid_argument("K < 2");
  if (!(top_fraction > 0.0) || top_fraction > 1.0) throw std::invalid_argument("top_fraction");

  // Smallest count n >= 1 with n >= top_fraction * (K - 1), tolerant to rounding.
  const double target = top_fraction * static_cast<double>(k - 1);
  std::size_t count = 1;
  while (static_cast<double>(count) + 1e-9 < target) ++count;
  if (count > k - 1) count = k - 1;

  IcecReport r;
  r.top_fraction = top_fraction;
  r.raw.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> col;
    for (std::size_t i = 0; i < k; ++i) {
      if (i != j) col.push_back(c[i][j]);
    }
    // Selection sort, descending.
    for (std::size_t a = 0; a < col.size(); ++a) {
      std::size_t best = a;
      for (std::size_t b = a + 1; b < col.size(); ++b) {
        if (col[b] > col[best]) best = b;
      }
      const double tmp = col[a];
      col[a] = col[best];
      col[best] = tmp;
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < count; ++n) sum += col[n];
    r.raw[j] = sum;
  }

  double peak = r.raw[0];
  for (double v : r.raw) {
    if (v > peak) peak = v;
  }
  r.normalized.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) r.normalized[j] = peak > 0.0 ? r.raw[j] / peak : 0.0;

  std::vector<bool> used(k, false);
  for (std::size_t slot = 0; slot < k; ++slot) {
    std::size_t pick = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (used[j]) continue;
      if (pick == k || r.normalized[j] > r.normalized[pick]) pick = j;
    }
    used[pick] = true;
    r.ranking.push_back(pick);
  }
  return r;
}

Table oracle_collapse(const std::vector<double>& values, std::size_t k, std::size_t n_freqs,
                      std::size_t n_windows, const std::vector<std::size_t>& freq_bins,
                      const std::vector<std::size_t>& windows) {
  Table out(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double sum = 0.0;
      double n = 0.0;
      for (std::size_t f : freq_bins) {
        for (std::size_t w : windows) {
          sum += values[((i * k + j) * n_freqs + f) * n_windows + w];
          n += 1.0;
        }
      }
      out[i][j] = sum / n;
    }
  }
  return out;
}

}  // namespace ecselect::oracle
