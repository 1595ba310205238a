#include "calred/simkit.hpp"

#include "calred/rng.hpp"

#include <cmath>

namespace calred {

AnglesXd half_circle_angles(int num_angles) {
  if (num_angles < 1) throw InvalidArgument("num_angles must be >= 1");
  AnglesXd a(num_angles);
  for (int i = 0; i < num_angles; ++i) a(i) = 180.0 * i / num_angles;
  return a;
}

AnglesXd perturb_angles(const AnglesXd& nominal, double sd_deg, std::uint64_t seed) {
  if (!(sd_deg >= 0)) throw InvalidArgument("angle noise sd must be >= 0");
  require_finite(nominal, "nominal angles");
  if (sd_deg == 0) return nominal;
  Rng rng(seed);
  AnglesXd out = nominal;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += sd_deg * rng.normal();
  return out;
}

SinogramXd standard_noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  SinogramXd e(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) e(r, c) = rng.normal();
  return e;
}

SinogramXd synth_sinogram(const RadonProjector<double>& op, const ImageXd& x, const AnglesXd& theta_true,
                          double input_snr_db, std::uint64_t seed) {
  SinogramXd clean = op.forward(x, theta_true);
  if (std::isinf(input_snr_db) && input_snr_db > 0) return clean;
  if (!std::isfinite(input_snr_db)) throw InvalidArgument("input SNR must be finite or +inf");
  const double signal = clean.norm();
  if (!(signal > 0)) throw InvalidArgument("cannot set an input SNR for a zero projection");
  SinogramXd e = standard_noise(clean.rows(), clean.cols(), seed);
  e *= signal * std::pow(10.0, -input_snr_db / 20.0) / e.norm();
  return clean + e;
}

}  // namespace calred
