#include "ecselect/butterworth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "ecselect/error.hpp"

namespace ecselect {

namespace {

using cdouble = std::complex<double>;

Biquad section_from_poles(cdouble p1, cdouble p2) {
  // Each section carries one zero at z = 1 and one at z = -1.
  Biquad s;
  s.b0 = 1.0;
  s.b1 = 0.0;
  s.b2 = -1.0;
  s.a1 = -(p1 + p2).real();
  s.a2 = (p1 * p2).real();
  return s;
}

// Steady-state section states for a constant input, so padding starts without a step.
std::vector<std::array<double, 2>> steady_state(const SosCascade& sos, double x0) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double x = x0;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const Biquad& s = sos[k];
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y = gain * x;
    zi[k][0] = y - s.b0 * x;
    zi[k][1] = s.b2 * x - s.a2 * y;
    x = y;
  }
  return zi;
}

void filter_with_state(const SosCascade& sos, std::span<double> x,
                       std::vector<std::array<double, 2>> state) {
  for (double& v : x) {
    double in = v;
    for (std::size_t k = 0; k < sos.size(); ++k) {
      const Biquad& s = sos[k];
      auto& z = state[k];
      const double out = s.b0 * in + z[0];
      z[0] = s.b1 * in - s.a1 * out + z[1];
      z[1] = s.b2 * in - s.a2 * out;
      in = out;
    }
    v = in;
  }
}

}  // namespace

SosCascade design_butterworth_bandpass(int order, double f_low, double f_high, double fs) {
  if (order < 1 || order > 10) {
    throw ConfigError("butterworth order must be in [1, 10], got " + std::to_string(order));
  }
  if (!(fs > 0.0) || !(f_low > 0.0) || !(f_low < f_high) || !(f_high < fs / 2.0)) {
    throw ConfigError("band edges must satisfy 0 < f_low < f_high < fs/2");
  }
  const double pi = std::numbers::pi;
  const double w1 = 2.0 * fs * std::tan(pi * f_low / fs);
  const double w2 = 2.0 * fs * std::tan(pi * f_high / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;

  std::vector<cdouble> poles;
  poles.reserve(2 * order);
  for (int k = 0; k < order; ++k) {
    const cdouble p = std::polar(1.0, pi * (2.0 * k + order + 1.0) / (2.0 * order));
    const cdouble a = p * (bw / 2.0);
    const cdouble d = std::sqrt(a * a - w0 * w0);
    for (const cdouble s : {a + d, a - d}) {
      poles.push_back((2.0 * fs + s) / (2.0 * fs - s));
    }
  }

  // Conjugate pairs first, then leftover real poles paired in sorted order.
  const double tol = 1e-10;
  std::vector<cdouble> upper;
  std::vector<double> real;
  for (const cdouble& z : poles) {
    if (z.imag() > tol) {
      upper.push_back(z);
    } else if (std::abs(z.imag()) <= tol) {
      real.push_back(z.real());
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](cdouble a, cdouble b) { return std::arg(a) < std::arg(b); });
  std::sort(real.begin(), real.end());

  SosCascade sos;
  for (const cdouble& z : upper) {
    sos.push_back(section_from_poles(z, std::conj(z)));
  }
  for (std::size_t k = 0; k + 1 < real.size(); k += 2) {
    sos.push_back(section_from_poles(real[k], real[k + 1]));
  }
  if (sos.size() != static_cast<std::size_t>(order)) {
    throw NumericalError("butterworth pole pairing failed");
  }

  // The pre-warped centre w0 maps exactly onto the analog unit-gain frequency.
  const double f_centre = std::atan(w0 / (2.0 * fs)) * fs / pi;
  const double gain = std::abs(sos_response(sos, f_centre, fs));
  const double per_section = std::pow(gain, 1.0 / order);
  for (Biquad& s : sos) {
    s.b0 /= per_section;
    s.b1 /= per_section;
    s.b2 /= per_section;
  }
  return sos;
}

std::complex<double> sos_response(const SosCascade& sos, double f, double fs) {
  const cdouble zinv = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const cdouble zinv2 = zinv * zinv;
  cdouble h = 1.0;
  for (const Biquad& s : sos) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
  }
  return h;
}

void sos_filter(const SosCascade& sos, std::span<double> x) {
  filter_with_state(sos, x, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
}

std::vector<double> sos_filtfilt(const SosCascade& sos, std::span<const double> x,
                                 std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);

  std::vector<double> ext(n + 2 * pad);
  for (std::size_t k = 0; k < pad; ++k) {
    ext[k] = 2.0 * x[0] - x[pad - k];
    ext[n + pad + k] = 2.0 * x[n - 1] - x[n - 2 - k];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  filter_with_state(sos, ext, steady_state(sos, ext.front()));
  std::reverse(ext.begin(), ext.end());
  filter_with_state(sos, ext, steady_state(sos, ext.front()));
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace ecselect
