#include "calred/denoise.hpp"

#include "calred/external.hpp"

namespace calred {

std::string_view to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::kIdentity:
      return "identity";
    case DenoiserKind::kGaussian:
      return "gaussian";
    case DenoiserKind::kTv:
      return "tv";
    case DenoiserKind::kExternal:
      return "external";
  }
  return "unknown";
}

DenoiserKind parse_denoiser_kind(std::string_view name) {
  if (name == "identity") return DenoiserKind::kIdentity;
  if (name == "gaussian") return DenoiserKind::kGaussian;
  if (name == "tv") return DenoiserKind::kTv;
  if (name == "external") return DenoiserKind::kExternal;
  throw InvalidArgument("unknown denoiser kind '" + std::string(name) + "'");
}

void DenoiserSpec::validate() const {
  if (!(sigma >= 0)) throw InvalidArgument("denoiser sigma must be >= 0");
  if (tv_iterations < 1) throw InvalidArgument("tv iterations must be >= 1");
  if (!(tv_dual_step > 0)) throw InvalidArgument("tv dual step must be > 0");
  if (gaussian_std && !(*gaussian_std >= 0)) throw InvalidArgument("gaussian std must be >= 0");
  if (tv_weight && !(*tv_weight >= 0)) throw InvalidArgument("tv weight must be >= 0");
  if (!(timeout_seconds > 0)) throw InvalidArgument("external timeout must be > 0");
  if (kind == DenoiserKind::kExternal && command.empty())
    throw InvalidArgument("external denoiser requires a command");
}

DenoiseResult denoise(const DenoiserSpec& spec, const ImageXd& x) {
  spec.validate();
  require_finite(x, "denoiser input");
  DenoiseResult result;
  switch (spec.kind) {
    case DenoiserKind::kIdentity:
      result.image = x;
      break;
    case DenoiserKind::kGaussian:
      result.image = gaussian_smooth(x, spec.effective_gaussian_std());
      break;
    case DenoiserKind::kTv: {
      const double weight = spec.effective_tv_weight();
      // TV with zero weight is the identity.
      result.image = weight > 0 ? tv_prox(x, weight, spec.tv_iterations, spec.tv_dual_step) : x;
      break;
    }
    case DenoiserKind::kExternal:
      return external_denoise(spec, x);
  }
  result.residual_norm = (x - result.image).norm();
  return result;
}

double red_penalty(const ImageXd& x, const ImageXd& denoised) {
  if (x.rows() != denoised.rows() || x.cols() != denoised.cols())
    throw DimensionError("denoised image shape differs from input");
  return 0.5 * x.cwiseProduct(x - denoised).sum();
}

double red_penalty(const ImageXd& x, const DenoiserSpec& spec) { return red_penalty(x, denoise(spec, x).image); }

}  // namespace calred
