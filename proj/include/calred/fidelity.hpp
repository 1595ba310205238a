#pragma once

#include "calred/projector.hpp"

namespace calred {

// Least-squares data term g(x, theta) = 1/2 ||y - H_theta x||^2 and its
// partial gradients.

template <typename Scalar>
Scalar data_fidelity(const RadonProjector<Scalar>& op, const Image<Scalar>& x, const Sinogram<Scalar>& y,
                     const Angles<Scalar>& theta_deg) {
  const Sinogram<Scalar> residual = y - op.forward(x, theta_deg);
  return residual.squaredNorm() / 2;
}

/// H^T (H x - y).
template <typename Scalar>
Image<Scalar> grad_x(const RadonProjector<Scalar>& op, const Image<Scalar>& x, const Sinogram<Scalar>& y,
                     const Angles<Scalar>& theta_deg) {
  const Sinogram<Scalar> residual = op.forward(x, theta_deg) - y;
  return op.adjoint(residual, theta_deg);
}

/// Component i is -<y_i - (H x)_i, d(H x)_i / d theta_i>, per degree. Row i
/// depends on theta_i alone, so components are computed independently.
template <typename Scalar>
Angles<Scalar> grad_theta(const RadonProjector<Scalar>& op, const Image<Scalar>& x, const Sinogram<Scalar>& y,
                          const Angles<Scalar>& theta_deg) {
  if (y.rows() != theta_deg.size() || y.cols() != op.num_detectors())
    throw DimensionError("sinogram shape does not match the angle set / detector count");
  if (theta_deg.size() < 1) throw InvalidArgument("angle set is empty");
  require_finite(theta_deg, "angle set");
  op.validate(x);
  const Eigen::Index m = theta_deg.size();
  Angles<Scalar> g(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto row = op.project_row(x, theta_deg(i));
    const auto d = op.angle_derivative(x, theta_deg(i));
    g(i) = -(y.row(i) - row).dot(d);
  }
  return g;
}

}  // namespace calred
