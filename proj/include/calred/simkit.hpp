#pragma once

#include "calred/projector.hpp"

#include <array>
#include <cstdint>
#include <limits>

namespace calred {

// ---------------------------------------------------------------------------
// Phantom

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double centre_x;
  double centre_y;
  double rotation_deg;
};

/// Modified Shepp-Logan table (Toft), coordinates normalised to [-1, 1].
inline constexpr std::array<Ellipse, 10> kModifiedSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

inline constexpr int kMinPhantomSize = 16;

/// Rasterises ellipses by sampling each pixel centre. Pixel (r, c) maps to
/// x = (c - (n-1)/2) / (n/2), y = ((n-1)/2 - r) / (n/2).
template <typename Scalar, std::size_t N>
Image<Scalar> rasterize_ellipses(int n, const std::array<Ellipse, N>& table) {
  Image<Scalar> img = Image<Scalar>::Zero(n, n);
  const double half = (n - 1) / 2.0;
  const double scale = n / 2.0;
  for (const Ellipse& e : table) {
    const double a = deg_to_rad(e.rotation_deg);
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double x = (c - half) / scale - e.centre_x;
        const double y = (half - r) / scale - e.centre_y;
        const double u = (x * ca + y * sa) / e.semi_x;
        const double v = (-x * sa + y * ca) / e.semi_y;
        if (u * u + v * v <= 1.0) img(r, c) += Scalar(e.intensity);
      }
    }
  }
  return img;
}

template <typename Scalar = double>
Image<Scalar> shepp_logan(int n) {
  if (n < kMinPhantomSize)
    throw InvalidArgument("phantom size must be >= " + std::to_string(kMinPhantomSize) + ", got " + std::to_string(n));
  // Overlapping ellipses cancel to zero only up to rounding; intensities stay in [0, 1].
  return rasterize_ellipses<Scalar>(n, kModifiedSheppLogan).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

// ---------------------------------------------------------------------------
// Angles and measurements

/// num_angles angles evenly spaced over [0, 180) degrees.
AnglesXd half_circle_angles(int num_angles);

/// Adds i.i.d. N(0, sd_deg^2) noise to each nominal angle.
AnglesXd perturb_angles(const AnglesXd& nominal, double sd_deg, std::uint64_t seed);

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// y = H x + e with e Gaussian, rescaled so that
/// 10 log10(||H x||^2 / ||e||^2) equals input_snr_db exactly.
/// input_snr_db = +inf disables the noise.
SinogramXd synth_sinogram(const RadonProjector<double>& op, const ImageXd& x, const AnglesXd& theta_true,
                          double input_snr_db, std::uint64_t seed);

/// The unit-variance noise draw used by synth_sinogram before rescaling.
SinogramXd standard_noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics

/// 10 log10(||x||^2 / ||x - estimate||^2); +inf when they are identical.
template <typename DerivedA, typename DerivedB>
double snr_db(const Eigen::MatrixBase<DerivedA>& estimate, const Eigen::MatrixBase<DerivedB>& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw DimensionError("snr_db: shape mismatch");
  const double signal = static_cast<double>(reference.squaredNorm());
  if (!(signal > 0)) throw InvalidArgument("snr_db: reference image is zero");
  const double error = static_cast<double>((reference - estimate).squaredNorm());
  if (error == 0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

/// sqrt(mean((a - b)^2)), degrees.
template <typename DerivedA, typename DerivedB>
double rmse_deg(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw DimensionError("rmse_deg: length mismatch");
  if (a.size() < 1) throw InvalidArgument("rmse_deg: empty angle sets");
  return std::sqrt(static_cast<double>((a - b).squaredNorm()) / static_cast<double>(a.size()));
}

}  // namespace calred
