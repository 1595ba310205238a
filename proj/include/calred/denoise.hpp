#pragma once

#include "calred/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace calred {

// ---------------------------------------------------------------------------
// Anisotropic total variation

/// sum |u(r,c+1) - u(r,c)| + sum |u(r+1,c) - u(r,c)|
template <typename Derived>
typename Derived::Scalar total_variation(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = u.rows();
  const Eigen::Index cols = u.cols();
  Scalar tv = 0;
  if (cols > 1) tv += (u.rightCols(cols - 1) - u.leftCols(cols - 1)).cwiseAbs().sum();
  if (rows > 1) tv += (u.bottomRows(rows - 1) - u.topRows(rows - 1)).cwiseAbs().sum();
  return tv;
}

/// 1/2 ||u - x||^2 + weight * TV(u)
template <typename Scalar>
Scalar tv_prox_objective(const Image<Scalar>& u, const Image<Scalar>& x, Scalar weight) {
  return (u - x).squaredNorm() / 2 + weight * total_variation(u);
}

namespace detail {

// D^T p for forward differences with Neumann boundary; ph has its last
// column and pv its last row identically zero.
template <typename Scalar>
Image<Scalar> difference_adjoint(const Image<Scalar>& ph, const Image<Scalar>& pv) {
  const Eigen::Index n_r = ph.rows();
  const Eigen::Index n_c = ph.cols();
  Image<Scalar> out(n_r, n_c);
  for (Eigen::Index r = 0; r < n_r; ++r) {
    for (Eigen::Index c = 0; c < n_c; ++c) {
      Scalar v = -ph(r, c) - pv(r, c);
      if (c > 0) v += ph(r, c - 1);
      if (r > 0) v += pv(r - 1, c);
      out(r, c) = v;
    }
  }
  return out;
}

struct NoObserver {
  template <typename... Args>
  void operator()(Args&&...) const {}
};

}  // namespace detail

inline constexpr int kDefaultTvIterations = 50;
inline constexpr double kDefaultTvDualStep = 0.25;

/// Proximal map of weight * TV_aniso:
///   argmin_u 1/2 ||u - x||^2 + weight * (||D_h u||_1 + ||D_v u||_1)
/// by projected gradient on the dual (Chambolle): u = x - weight * D^T p with
/// |p| <= 1 componentwise. `observer(iteration, u)` sees every primal iterate.
template <typename Scalar, typename Observer = detail::NoObserver>
Image<Scalar> tv_prox(const Image<Scalar>& x, Scalar weight, int iterations, Scalar dual_step = Scalar(kDefaultTvDualStep),
                      Observer&& observer = {}) {
  if (!(weight > 0)) throw InvalidArgument("tv_prox weight must be > 0");
  if (iterations < 1) throw InvalidArgument("tv_prox iterations must be >= 1");
  require_finite(x, "tv_prox input");
  const Eigen::Index n_r = x.rows();
  const Eigen::Index n_c = x.cols();
  Image<Scalar> ph = Image<Scalar>::Zero(n_r, n_c);
  Image<Scalar> pv = Image<Scalar>::Zero(n_r, n_c);
  Image<Scalar> u = x;
  const Scalar rate = dual_step / weight;
  for (int it = 1; it <= iterations; ++it) {
    for (Eigen::Index r = 0; r < n_r; ++r) {
      for (Eigen::Index c = 0; c < n_c; ++c) {
        if (c + 1 < n_c) ph(r, c) = std::clamp(ph(r, c) + rate * (u(r, c + 1) - u(r, c)), Scalar(-1), Scalar(1));
        if (r + 1 < n_r) pv(r, c) = std::clamp(pv(r, c) + rate * (u(r + 1, c) - u(r, c)), Scalar(-1), Scalar(1));
      }
    }
    u = x - weight * detail::difference_adjoint(ph, pv);
    observer(it, static_cast<const Image<Scalar>&>(u));
  }
  return u;
}

// ---------------------------------------------------------------------------
// Gaussian smoothing

/// Normalised kernel exp(-k^2 / (2 std^2)), k in [-ceil(3 std), ceil(3 std)].
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(Scalar std_px) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * std_px)));
  std::vector<Scalar> k(2 * radius + 1);
  Scalar sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-Scalar(i * i) / (2 * std_px * std_px));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

namespace detail {
// Half-sample symmetric reflection: -1 -> 0, n -> n-1.
inline Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}
}  // namespace detail

/// Separable Gaussian blur with symmetric boundary. Every output pixel is a
/// convex combination of inputs, so constants are preserved and the range
/// never grows. std_px <= 0 returns the input unchanged.
template <typename Scalar>
Image<Scalar> gaussian_smooth(const Image<Scalar>& x, Scalar std_px) {
  if (!(std_px > 0)) return x;
  const std::vector<Scalar> k = gaussian_kernel(std_px);
  const Eigen::Index radius = static_cast<Eigen::Index>(k.size() / 2);
  const Eigen::Index n_r = x.rows();
  const Eigen::Index n_c = x.cols();
  Image<Scalar> tmp(n_r, n_c);
  for (Eigen::Index r = 0; r < n_r; ++r)
    for (Eigen::Index c = 0; c < n_c; ++c) {
      Scalar acc = 0;
      for (Eigen::Index j = -radius; j <= radius; ++j) acc += k[j + radius] * x(r, detail::reflect(c + j, n_c));
      tmp(r, c) = acc;
    }
  Image<Scalar> out(n_r, n_c);
  for (Eigen::Index r = 0; r < n_r; ++r)
    for (Eigen::Index c = 0; c < n_c; ++c) {
      Scalar acc = 0;
      for (Eigen::Index j = -radius; j <= radius; ++j) acc += k[j + radius] * tmp(detail::reflect(r + j, n_r), c);
      out(r, c) = acc;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Denoiser dispatch

enum class DenoiserKind { kIdentity, kGaussian, kTv, kExternal };

std::string_view to_string(DenoiserKind kind);
DenoiserKind parse_denoiser_kind(std::string_view name);

/// sigma follows the 0-255 intensity convention. Native denoisers map it
/// monotonically onto their own parameter:
///   gaussian: std (pixels) = sigma / 10
///   tv:       weight       = 0.5 * sigma / 255
/// Either mapping can be overridden explicitly.
struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::kIdentity;
  double sigma = 0.0;
  std::optional<double> gaussian_std;
  std::optional<double> tv_weight;
  int tv_iterations = kDefaultTvIterations;
  double tv_dual_step = kDefaultTvDualStep;
  // external: argv prefix; the input path, output path and sigma are appended.
  std::vector<std::string> command;
  double timeout_seconds = 60.0;

  double effective_gaussian_std() const { return gaussian_std.value_or(sigma / 10.0); }
  double effective_tv_weight() const { return tv_weight.value_or(0.5 * sigma / 255.0); }

  void validate() const;
};

struct DenoiseResult {
  ImageXd image;
  double residual_norm = 0.0;  // ||input - output||
};

DenoiseResult denoise(const DenoiserSpec& spec, const ImageXd& x);

/// 1/2 <x, x - D(x)>
double red_penalty(const ImageXd& x, const DenoiserSpec& spec);
double red_penalty(const ImageXd& x, const ImageXd& denoised);

}  // namespace calred
