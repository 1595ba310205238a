#pragma once

#include "calred/projector.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <numbers>
#include <vector>

namespace calred {

inline int next_power_of_two(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

/// Frequency response of the Ram-Lak ramp on `padded` samples (about 1 at
/// Nyquist). Built as the DFT of the band-limited spatial kernel
/// h(0) = 1/2, h(k odd) = -2/(pi^2 k^2), h(k even) = 0, truncated at
/// |k| < padded/2, which avoids the DC offset of a sampled |f|.
template <typename Scalar>
std::vector<Scalar> ram_lak_response(int padded) {
  std::vector<Scalar> kernel(padded, Scalar(0));
  kernel[0] = Scalar(0.5);
  const Scalar pi2 = std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar>;
  for (int k = 1; k < padded / 2; ++k) {
    if (k % 2 == 0) continue;
    const Scalar v = Scalar(-2) / (pi2 * Scalar(k) * Scalar(k));
    kernel[k] = v;
    kernel[padded - k] = v;
  }
  Eigen::FFT<Scalar> fft;
  std::vector<std::complex<Scalar>> spectrum;
  fft.fwd(spectrum, kernel);
  std::vector<Scalar> response(padded);
  for (int k = 0; k < padded; ++k) response[k] = spectrum[k].real();
  return response;
}

/// Ramp-filters every sinogram row (zero padding to the next power of two
/// >= 2 * num_detectors).
template <typename Scalar>
Sinogram<Scalar> ramp_filter(const Sinogram<Scalar>& y) {
  const int d = static_cast<int>(y.cols());
  const int padded = next_power_of_two(2 * d);
  const std::vector<Scalar> response = ram_lak_response<Scalar>(padded);
  Sinogram<Scalar> out(y.rows(), y.cols());
  Eigen::FFT<Scalar> fft;
  std::vector<Scalar> buf(padded);
  std::vector<std::complex<Scalar>> spec;
  std::vector<Scalar> back;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    std::fill(buf.begin(), buf.end(), Scalar(0));
    for (int j = 0; j < d; ++j) buf[j] = y(i, j);
    fft.fwd(spec, buf);
    for (int k = 0; k < padded; ++k) spec[k] *= response[k];
    fft.inv(back, spec);
    for (int j = 0; j < d; ++j) out(i, j) = back[j];
  }
  return out;
}

/// Filtered back-projection: ramp filter, exact back-projection, and the
/// pi / (2 * num_angles) quadrature weight for a half-circle scan.
template <typename Scalar>
Image<Scalar> fbp(const RadonProjector<Scalar>& op, const Sinogram<Scalar>& y, const Angles<Scalar>& theta_deg) {
  if (y.rows() != theta_deg.size() || y.cols() != op.num_detectors())
    throw DimensionError("sinogram shape does not match the angle set / detector count");
  require_finite(y, "sinogram");
  const Sinogram<Scalar> filtered = ramp_filter(y);
  const Scalar scale = std::numbers::pi_v<Scalar> / (Scalar(2) * Scalar(theta_deg.size()));
  return op.adjoint(filtered, theta_deg) * scale;
}

}  // namespace calred
