#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ecselect {

/// Normalized second-order section: (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosCascade = std::vector<Biquad>;

/// Digital Butterworth band-pass of prototype order `order` (2*order poles), built
/// from the analog prototype through the pre-warped bilinear transform. Unit gain
/// at the geometric band centre.
SosCascade design_butterworth_bandpass(int order, double f_low, double f_high, double fs);

/// Complex frequency response of the cascade at `f` Hz.
std::complex<double> sos_response(const SosCascade& sos, double f, double fs);

/// Causal filtering in place, zero initial state (transposed direct form II).
void sos_filter(const SosCascade& sos, std::span<double> x);

/// Forward-backward filtering with odd reflection padding of `pad` samples per side.
std::vector<double> sos_filtfilt(const SosCascade& sos, std::span<const double> x,
                                 std::size_t pad);

}  // namespace ecselect
