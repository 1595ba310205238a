#pragma once

#include "calred/denoise.hpp"
#include "calred/projector.hpp"
#include "calred/rng.hpp"

#include <cstdint>

namespace calred::test {

inline ImageXd random_image(int n, std::uint64_t seed) {
  Rng rng(seed);
  ImageXd x(n, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

inline SinogramXd random_sinogram(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  SinogramXd y(rows, cols);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  return y;
}

inline AnglesXd random_angles(int m, std::uint64_t seed) {
  Rng rng(seed);
  AnglesXd a(m);
  for (int i = 0; i < m; ++i) a(i) = 180.0 * rng.uniform();
  return a;
}

// Gaussian-smoothed noise, masked to the projector support.
inline ImageXd smooth_random_image(const RadonProjector<double>& op, std::uint64_t seed, double std_px = 2.0) {
  return op.apply_mask(gaussian_smooth(random_image(op.image_size(), seed), std_px));
}

inline ImageXd disk_image(int n, double radius) {
  ImageXd x = ImageXd::Zero(n, n);
  const double half = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double dx = c - half;
      const double dy = half - r;
      if (dx * dx + dy * dy <= radius * radius) x(r, c) = 1.0;
    }
  return x;
}

inline RadonProjector<double> make_projector(int n, AngleDerivative mode = AngleDerivative::kSpatialGradient) {
  ProjectorConfig cfg = ProjectorConfig::for_size(n);
  cfg.angle_derivative = mode;
  return RadonProjector<double>(cfg);
}

inline double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace calred::test
