#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calred {

// Images and sinograms are row-major so that row i of a sinogram is the
// projection at angle i and pixel (0,0) of an image is the top-left corner.
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Sinogram = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Projection angles, always in degrees at public boundaries.
template <typename Scalar>
using Angles = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using ImageXd = Image<double>;
using SinogramXd = Sinogram<double>;
using AnglesXd = Angles<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + " contains non-finite values");
}

}  // namespace calred
