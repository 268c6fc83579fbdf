#pragma once

// Deliberately naive reference implementations for cross-checking. Nothing here
// calls into the modules they check.

#include <cstddef>
#include <vector>

#include "ecselect/icec.hpp"

namespace ecselect::oracle {

using Table = std::vector<std::vector<double>>;

/// ICEC by explicit loops over a row-major table C[to][from].
IcecReport oracle_icec(const Table& c, double top_fraction = 0.3);

/// Mean over an explicit [to][from][freq][window] table, with bin and window lists.
Table oracle_collapse(const std::vector<double>& values, std::size_t k, std::size_t n_freqs,
                      std::size_t n_windows, const std::vector<std::size_t>& freq_bins,
                      const std::vector<std::size_t>& windows);

}  // namespace ecselect::oracle
