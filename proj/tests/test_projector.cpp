#include "support.hpp"

#include "calred/projector.hpp"

#include <doctest.h>

#include <cmath>

using namespace calred;
using calred::test::make_projector;
using calred::test::random_angles;
using calred::test::random_image;
using calred::test::random_sinogram;
using calred::test::smooth_random_image;

TEST_CASE("default detector count is the smallest odd integer covering the diagonal") {
  CHECK(default_num_detectors(16) == 23);
  CHECK(default_num_detectors(32) == 47);
  CHECK(default_num_detectors(64) == 91);
  CHECK(default_num_detectors(128) == 183);
  for (int n = 2; n <= 300; ++n) {
    const int d = default_num_detectors(n);
    CHECK(d % 2 == 1);
    CHECK(d >= n * std::sqrt(2.0));
    CHECK(d - 2 < n * std::sqrt(2.0));
  }
}

TEST_CASE("config validation") {
  ProjectorConfig cfg = ProjectorConfig::for_size(16);
  cfg.num_detectors = 24;
  CHECK_THROWS_AS(RadonProjector<double>{cfg}, InvalidArgument);
  CHECK_THROWS_AS(RadonProjector<double>{ProjectorConfig::for_size(1)}, InvalidArgument);
  CHECK(parse_support_mask("full_square") == SupportMask::kFullSquare);
  CHECK(parse_angle_derivative(to_string(AngleDerivative::kExact)) == AngleDerivative::kExact);
  CHECK_THROWS_AS(parse_angle_derivative("autodiff"), InvalidArgument);
}

TEST_CASE("zero image projects to a zero sinogram") {
  const auto op = make_projector(64);
  const SinogramXd y = forward_project(op, ImageXd::Zero(64, 64).eval(), random_angles(90, 1));
  CHECK(y.rows() == 90);
  CHECK(y.cols() == op.num_detectors());
  CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centred point projects to a symmetric row of unit mass") {
  const int n = 65;
  const auto op = make_projector(n);
  ImageXd x = ImageXd::Zero(n, n);
  x(n / 2, n / 2) = 1.0;
  const SinogramXd y = forward_project(op, x, random_angles(25, 2));
  const int d = op.num_detectors();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    CHECK(std::abs(y.row(i).sum() - 1.0) < 1e-6);
    for (int j = 0; j < d; ++j) CHECK(std::abs(y(i, j) - y(i, d - 1 - j)) < 1e-12);
  }
}

// Direct column-sum oracle at theta = 0, where the ray through column c lands
// at detector coordinate t = c - (n-1)/2.
SinogramXd column_sum_oracle(const ImageXd& masked, int d) {
  const int n = static_cast<int>(masked.rows());
  SinogramXd row = SinogramXd::Zero(1, d);
  for (int c = 0; c < n; ++c) {
    const double t = c - (n - 1) / 2.0 + (d - 1) / 2.0;
    const int j = static_cast<int>(std::floor(t));
    const double f = t - j;
    const double s = masked.col(c).sum();
    row(0, j) += (1 - f) * s;
    if (f > 0) row(0, j + 1) += f * s;
  }
  return row;
}

TEST_CASE("theta = 0 sums columns of the masked image") {
  const AnglesXd zero = AnglesXd::Zero(1);
  SUBCASE("odd n: each column lands on one bin") {
    const auto op = make_projector(33);
    const ImageXd x = random_image(33, 3);
    const ImageXd masked = op.apply_mask(x);
    const SinogramXd y = forward_project(op, x, zero);
    const int offset = (op.num_detectors() - 33) / 2;
    for (int c = 0; c < 33; ++c) CHECK(std::abs(y(0, c + offset) - masked.col(c).sum()) < 1e-6);
  }
  SUBCASE("even n: each column is split evenly between two bins") {
    const auto op = make_projector(32);
    const ImageXd x = random_image(32, 4);
    const SinogramXd y = forward_project(op, x, zero);
    CHECK((y - column_sum_oracle(op.apply_mask(x), op.num_detectors())).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("linearity") {
  const auto op = make_projector(32);
  const AnglesXd theta = random_angles(12, 5);
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = rng.normal();
    const double b = rng.normal();
    const ImageXd x1 = random_image(32, 100 + trial);
    const ImageXd x2 = random_image(32, 200 + trial);
    const ImageXd combo = a * x1 + b * x2;
    const SinogramXd lhs = forward_project(op, combo, theta);
    const SinogramXd rhs = a * forward_project(op, x1, theta) + b * forward_project(op, x2, theta);
    CHECK((lhs - rhs).norm() / rhs.norm() < 1e-10);
  }
}

TEST_CASE("adjoint dot-product test, 100 random pairs") {
  const auto op = make_projector(32);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const AnglesXd theta = random_angles(10, 1000 + trial);
    const ImageXd x = random_image(32, 2000 + trial);
    const SinogramXd y = random_sinogram(10, op.num_detectors(), 3000 + trial);
    const SinogramXd rx = forward_project(op, x, theta);
    const ImageXd ry = back_project(op, y, theta);
    const double gap = std::abs(rx.cwiseProduct(y).sum() - x.cwiseProduct(ry).sum()) / (rx.norm() * y.norm());
    worst = std::max(worst, gap);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("zero sinogram back-projects to a zero image") {
  const auto op = make_projector(32);
  const ImageXd x = back_project(op, SinogramXd::Zero(7, op.num_detectors()).eval(), random_angles(7, 8));
  CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centre-bin mass at theta = 0 back-projects onto the central column") {
  const int n = 33;
  const auto op = make_projector(n);
  const int d = op.num_detectors();
  SinogramXd y = SinogramXd::Zero(1, d);
  y(0, (d - 1) / 2) = 1.0;
  const ImageXd bp = back_project(op, y, AnglesXd::Zero(1).eval());

  // Hand-rolled transpose: entry (r, c) of the column-sum operator's row for
  // the centre bin is 1 when c is the central column and (r, c) is in the disk.
  ImageXd expected = ImageXd::Zero(n, n);
  const ImageXd ones = op.apply_mask(ImageXd::Ones(n, n));
  for (int r = 0; r < n; ++r) expected(r, n / 2) = ones(r, n / 2);
  CHECK((bp - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bp.col(n / 2).sum() == doctest::Approx(n));
}

TEST_CASE("full-square mask keeps the corners") {
  ProjectorConfig cfg = ProjectorConfig::for_size(16);
  cfg.mask = SupportMask::kFullSquare;
  const RadonProjector<double> square(cfg);
  const auto disk = make_projector(16);
  ImageXd x = ImageXd::Zero(16, 16);
  x(0, 0) = 1.0;
  const AnglesXd theta = random_angles(4, 9);
  CHECK(forward_project(disk, x, theta).norm() == 0.0);
  CHECK(forward_project(square, x, theta).norm() > 0.0);
}

TEST_CASE("row i depends on theta_i only") {
  const auto op = make_projector(32);
  const ImageXd x = random_image(32, 10);
  AnglesXd theta = random_angles(8, 11);
  const SinogramXd before = forward_project(op, x, theta);
  theta(3) += 7.5;
  const SinogramXd after = forward_project(op, x, theta);
  for (Eigen::Index i = 0; i < 8; ++i) {
    if (i == 3)
      CHECK(before.row(i) != after.row(i));
    else
      CHECK(before.row(i) == after.row(i));
  }
}

TEST_CASE("forward and adjoint are deterministic") {
  const auto op = make_projector(48);
  const ImageXd x = random_image(48, 12);
  const AnglesXd theta = random_angles(30, 13);
  const SinogramXd y = forward_project(op, x, theta);
  CHECK(forward_project(op, x, theta) == y);
  CHECK(back_project(op, y, theta) == back_project(op, y, theta));
}

TEST_CASE("float instantiation agrees with double") {
  ProjectorConfig cfg = ProjectorConfig::for_size(32);
  const RadonProjector<float> opf(cfg);
  const RadonProjector<double> opd(cfg);
  const ImageXd x = random_image(32, 14);
  const AnglesXd theta = random_angles(6, 15);
  const SinogramXd yd = forward_project(opd, x, theta);
  const Sinogram<float> yf = forward_project(opf, Image<float>(x.cast<float>()), Angles<float>(theta.cast<float>()));
  CHECK((yf.cast<double>() - yd).norm() / yd.norm() < 1e-5);
}

TEST_CASE("shape and finiteness errors") {
  const auto op = make_projector(16);
  const AnglesXd theta = random_angles(3, 16);
  CHECK_THROWS_AS(forward_project(op, ImageXd::Zero(15, 16).eval(), theta), DimensionError);
  ImageXd bad = ImageXd::Zero(16, 16);
  bad(2, 2) = std::nan("");
  CHECK_THROWS_AS(forward_project(op, bad, theta), InvalidArgument);
  CHECK_THROWS_AS(back_project(op, SinogramXd::Zero(4, op.num_detectors()).eval(), theta), DimensionError);
  CHECK_THROWS_AS(projection_angle_derivative(op, bad, 10.0), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Angle derivative

SinogramXd fd_row(const RadonProjector<double>& op, const ImageXd& x, double angle) {
  const double h = kAngleFiniteDifferenceStepDeg;
  AnglesXd plus(1), minus(1);
  plus << angle + h;
  minus << angle - h;
  return (forward_project(op, x, plus) - forward_project(op, x, minus)) / (2 * h);
}

TEST_CASE("zero image has a zero angle derivative in every mode") {
  const auto op = make_projector(32);
  const ImageXd zero = ImageXd::Zero(32, 32);
  for (auto mode : {AngleDerivative::kExact, AngleDerivative::kSpatialGradient, AngleDerivative::kFiniteDifference})
    CHECK(op.angle_derivative(zero, 21.0, mode).norm() == 0.0);
}

TEST_CASE("exact derivative matches a central difference of forward_project") {
  const auto op = make_projector(32, AngleDerivative::kExact);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageXd x = smooth_random_image(op, seed);
    const auto d = projection_angle_derivative(op, x, 37.3);
    const SinogramXd fd = fd_row(op, x, 37.3);
    CHECK((d - fd).norm() / fd.norm() < 1e-3);
  }
}

TEST_CASE("finite-difference mode is the central difference") {
  const auto op = make_projector(32, AngleDerivative::kFiniteDifference);
  const ImageXd x = smooth_random_image(op, 7);
  CHECK((projection_angle_derivative(op, x, 12.0) - fd_row(op, x, 12.0)).norm() < 1e-12 * fd_row(op, x, 12.0).norm());
}

ImageXd centred_blob(int n, double std_px) {
  ImageXd x(n, n);
  const double half = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double rr = (c - half) * (c - half) + (half - r) * (half - r);
      x(r, c) = std::exp(-rr / (2 * std_px * std_px));
    }
  return x;
}

TEST_CASE("rotation-invariant blob has a vanishing spatial-gradient derivative") {
  const auto op = make_projector(64, AngleDerivative::kSpatialGradient);
  const ImageXd blob = centred_blob(64, 6.0);
  for (double angle : {0.0, 17.3, 45.0, 90.0, 133.7}) {
    AnglesXd a(1);
    a << angle;
    const double row_norm = forward_project(op, blob, a).norm();
    CHECK(projection_angle_derivative(op, blob, angle).norm() < 1e-3 * row_norm);
  }
}

TEST_CASE("exact derivative of a centred blob tracks the discrete projector") {
  // The pixel-driven projector is not exactly rotation invariant, so the
  // exact derivative of a blob need not vanish.
  const auto op = make_projector(64, AngleDerivative::kExact);
  const ImageXd blob = centred_blob(64, 6.0);
  for (double angle : {0.0, 17.3, 45.0, 133.7}) {
    const SinogramXd fd = fd_row(op, blob, angle);
    const auto d = projection_angle_derivative(op, blob, angle);
    CHECK((d - fd).norm() < 1e-3 * std::max(fd.norm(), 1e-9) + 1e-9);
  }
}
