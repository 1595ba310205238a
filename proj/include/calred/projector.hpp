#pragma once

#include "calred/types.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace calred {

enum class SupportMask { kFullSquare, kInscribedDisk };

// How d(projection row)/d(angle) is evaluated.
//  kExact           derivative of the pixel-driven projector itself
//                   (rotation velocity of each pixel times the hat-kernel slope)
//  kSpatialGradient central-difference image gradient contracted with the
//                   rotation velocity field, then projected
//  kFiniteDifference central difference of the forward projector, 1e-3 degrees
enum class AngleDerivative { kExact, kSpatialGradient, kFiniteDifference };

inline constexpr double kAngleFiniteDifferenceStepDeg = 1e-3;

/// Smallest odd integer >= n*sqrt(2).
inline int default_num_detectors(int n) {
  int d = static_cast<int>(std::ceil(n * std::numbers::sqrt2 - 1e-12));
  return d % 2 == 0 ? d + 1 : d;
}

struct ProjectorConfig {
  int n = 0;
  int num_detectors = 0;
  SupportMask mask = SupportMask::kInscribedDisk;
  AngleDerivative angle_derivative = AngleDerivative::kSpatialGradient;

  static ProjectorConfig for_size(int n) {
    ProjectorConfig cfg;
    cfg.n = n;
    cfg.num_detectors = default_num_detectors(n);
    return cfg;
  }

  void validate() const {
    if (n < 2) throw InvalidArgument("projector image size must be >= 2");
    if (num_detectors < 1 || num_detectors % 2 == 0)
      throw InvalidArgument("num_detectors must be a positive odd integer");
  }
};

std::string_view to_string(SupportMask mask);
std::string_view to_string(AngleDerivative mode);
SupportMask parse_support_mask(std::string_view name);
AngleDerivative parse_angle_derivative(std::string_view name);

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * (std::numbers::pi_v<Scalar> / Scalar(180));
}

/// Parallel-beam Radon transform on an n x n grid with unit pixel pitch.
///
/// Geometry: pixel (r, c) sits at x = c - (n-1)/2, y = (n-1)/2 - r (y up).
/// A ray at angle theta (counter-clockwise from +x) hits the detector at
/// t = x cos(theta) + y sin(theta); detector bin j is centred at
/// t = j - (D-1)/2. Each pixel deposits its value onto the two nearest bins
/// with linear weights. The adjoint uses the same weights, transposed.
///
/// Immutable after construction and safe to share between threads.
template <typename Scalar>
class RadonProjector {
 public:
  using ImageT = Image<Scalar>;
  using SinogramT = Sinogram<Scalar>;
  using AnglesT = Angles<Scalar>;
  using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  explicit RadonProjector(ProjectorConfig cfg) : cfg_(cfg) {
    if (cfg_.num_detectors == 0 && cfg_.n >= 2) cfg_.num_detectors = default_num_detectors(cfg_.n);
    cfg_.validate();
    const Scalar half = Scalar(cfg_.n - 1) / 2;
    const Scalar radius_sq = Scalar(cfg_.n) * Scalar(cfg_.n) / 4;
    for (int r = 0; r < cfg_.n; ++r) {
      for (int c = 0; c < cfg_.n; ++c) {
        const Scalar x = Scalar(c) - half;
        const Scalar y = half - Scalar(r);
        if (cfg_.mask == SupportMask::kInscribedDisk && x * x + y * y > radius_sq) continue;
        support_.push_back({Eigen::Index(r) * cfg_.n + c, x, y});
      }
    }
  }

  const ProjectorConfig& config() const { return cfg_; }
  int image_size() const { return cfg_.n; }
  int num_detectors() const { return cfg_.num_detectors; }

  /// Zeroes every pixel outside the support mask.
  ImageT apply_mask(const ImageT& x) const {
    check_image(x);
    ImageT out = ImageT::Zero(cfg_.n, cfg_.n);
    for (const auto& p : support_) out.data()[p.index] = x.data()[p.index];
    return out;
  }

  SinogramT forward(const ImageT& x, const AnglesT& theta_deg) const {
    check_image(x);
    check_angles(theta_deg);
    require_finite(x, "image");
    const Eigen::Index m = theta_deg.size();
    SinogramT y(m, cfg_.num_detectors);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
      Row row = Row::Zero(cfg_.num_detectors);
      project_into(x.data(), theta_deg(i), row.data());
      y.row(i) = row;
    }
    return y;
  }

  /// Throws unless x has the projector's shape and finite values.
  void validate(const ImageT& x) const {
    check_image(x);
    require_finite(x, "image");
  }

  /// One projection row; depends on angle_deg only. Only the shape of x is
  /// checked here; see validate().
  Row project_row(const ImageT& x, Scalar angle_deg) const {
    check_image(x);
    Row row = Row::Zero(cfg_.num_detectors);
    project_into(x.data(), angle_deg, row.data());
    return row;
  }

  ImageT adjoint(const SinogramT& y, const AnglesT& theta_deg) const {
    check_angles(theta_deg);
    check_sinogram(y, theta_deg);
    const Eigen::Index m = theta_deg.size();
    std::vector<Scalar> cs(m), sn(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar a = deg_to_rad(theta_deg(i));
      cs[i] = std::cos(a);
      sn[i] = std::sin(a);
    }
    const Scalar centre = Scalar(cfg_.num_detectors - 1) / 2;
    const int d = cfg_.num_detectors;
    ImageT out = ImageT::Zero(cfg_.n, cfg_.n);
    const auto count = static_cast<std::ptrdiff_t>(support_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const Pixel& p = support_[k];
      Scalar acc = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar t = p.x * cs[i] + p.y * sn[i] + centre;
        const Scalar fl = std::floor(t);
        const int j = static_cast<int>(fl);
        const Scalar f = t - fl;
        const Scalar* yi = y.data() + i * d;
        if (j >= 0 && j < d) acc += (Scalar(1) - f) * yi[j];
        if (j + 1 >= 0 && j + 1 < d) acc += f * yi[j + 1];
      }
      out.data()[p.index] = acc;
    }
    return out;
  }

  /// d/d(angle) of the projection row at angle_deg, per degree.
  Row angle_derivative(const ImageT& x, Scalar angle_deg) const {
    return angle_derivative(x, angle_deg, cfg_.angle_derivative);
  }

  Row angle_derivative(const ImageT& x, Scalar angle_deg, AngleDerivative mode) const {
    check_image(x);
    if (!std::isfinite(static_cast<double>(angle_deg))) throw InvalidArgument("angle is not finite");
    switch (mode) {
      case AngleDerivative::kExact:
        return exact_derivative(x, angle_deg);
      case AngleDerivative::kSpatialGradient:
        return spatial_gradient_derivative(x, angle_deg);
      case AngleDerivative::kFiniteDifference: {
        const Scalar h = Scalar(kAngleFiniteDifferenceStepDeg);
        return (project_row(x, angle_deg + h) - project_row(x, angle_deg - h)) / (2 * h);
      }
    }
    throw InvalidArgument("unknown angle derivative mode");
  }

 private:
  struct Pixel {
    Eigen::Index index;
    Scalar x;
    Scalar y;
  };

  void project_into(const Scalar* image, Scalar angle_deg, Scalar* row) const {
    const Scalar a = deg_to_rad(angle_deg);
    const Scalar c = std::cos(a);
    const Scalar s = std::sin(a);
    const Scalar centre = Scalar(cfg_.num_detectors - 1) / 2;
    const int d = cfg_.num_detectors;
    for (const auto& p : support_) {
      const Scalar v = image[p.index];
      if (v == Scalar(0)) continue;
      const Scalar t = p.x * c + p.y * s + centre;
      const Scalar fl = std::floor(t);
      const int j = static_cast<int>(fl);
      const Scalar f = t - fl;
      if (j >= 0 && j < d) row[j] += (Scalar(1) - f) * v;
      if (j + 1 >= 0 && j + 1 < d) row[j + 1] += f * v;
    }
  }

  Row exact_derivative(const ImageT& x, Scalar angle_deg) const {
    const Scalar a = deg_to_rad(angle_deg);
    const Scalar c = std::cos(a);
    const Scalar s = std::sin(a);
    const Scalar per_degree = std::numbers::pi_v<Scalar> / Scalar(180);
    const Scalar centre = Scalar(cfg_.num_detectors - 1) / 2;
    const int d = cfg_.num_detectors;
    Row row = Row::Zero(d);
    for (const auto& p : support_) {
      const Scalar v = x.data()[p.index];
      if (v == Scalar(0)) continue;
      const Scalar t = p.x * c + p.y * s + centre;
      const int j = static_cast<int>(std::floor(t));
      // dt/dtheta for a pixel at (x, y); the hat weights have slope -1 on
      // bin j and +1 on bin j+1 (right derivative at bin centres).
      const Scalar rate = v * (-p.x * s + p.y * c) * per_degree;
      if (j >= 0 && j < d) row[j] -= rate;
      if (j + 1 >= 0 && j + 1 < d) row[j + 1] += rate;
    }
    return row;
  }

  Row spatial_gradient_derivative(const ImageT& x, Scalar angle_deg) const {
    const ImageT xm = apply_mask(x);
    const int n = cfg_.n;
    const Scalar half = Scalar(n - 1) / 2;
    const Scalar per_degree = std::numbers::pi_v<Scalar> / Scalar(180);
    ImageT w = ImageT::Zero(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const Scalar gx = (c > 0 && c < n - 1) ? (xm(r, c + 1) - xm(r, c - 1)) / 2 : Scalar(0);
        const Scalar gy = (r > 0 && r < n - 1) ? (xm(r - 1, c) - xm(r + 1, c)) / 2 : Scalar(0);
        const Scalar px = Scalar(c) - half;
        const Scalar py = half - Scalar(r);
        w(r, c) = (gx * (-py) + gy * px) * per_degree;
      }
    }
    return project_row(w, angle_deg);
  }

  void check_image(const ImageT& x) const {
    if (x.rows() != cfg_.n || x.cols() != cfg_.n)
      throw DimensionError("image is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                           ", projector expects " + std::to_string(cfg_.n) + "x" + std::to_string(cfg_.n));
  }

  void check_angles(const AnglesT& theta) const {
    if (theta.size() < 1) throw InvalidArgument("angle set is empty");
    require_finite(theta, "angle set");
  }

  void check_sinogram(const SinogramT& y, const AnglesT& theta) const {
    if (y.rows() != theta.size() || y.cols() != cfg_.num_detectors)
      throw DimensionError("sinogram is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) + ", expected " +
                           std::to_string(theta.size()) + "x" + std::to_string(cfg_.num_detectors));
  }

  ProjectorConfig cfg_;
  std::vector<Pixel> support_;
};

// Free-function surface.

template <typename Scalar>
Sinogram<Scalar> forward_project(const RadonProjector<Scalar>& op, const Image<Scalar>& x,
                                 const Angles<Scalar>& theta_deg) {
  return op.forward(x, theta_deg);
}

template <typename Scalar>
Image<Scalar> back_project(const RadonProjector<Scalar>& op, const Sinogram<Scalar>& y,
                           const Angles<Scalar>& theta_deg) {
  return op.adjoint(y, theta_deg);
}

template <typename Scalar>
typename RadonProjector<Scalar>::Row projection_angle_derivative(const RadonProjector<Scalar>& op,
                                                                 const Image<Scalar>& x, Scalar angle_deg) {
  op.validate(x);
  return op.angle_derivative(x, angle_deg);
}

extern template class RadonProjector<double>;
extern template class RadonProjector<float>;

}  // namespace calred
