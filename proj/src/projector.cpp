#include "calred/projector.hpp"

namespace calred {

template class RadonProjector<double>;
template class RadonProjector<float>;

std::string_view to_string(SupportMask mask) {
  switch (mask) {
    case SupportMask::kFullSquare:
      return "full_square";
    case SupportMask::kInscribedDisk:
      return "inscribed_disk";
  }
  return "unknown";
}

std::string_view to_string(AngleDerivative mode) {
  switch (mode) {
    case AngleDerivative::kExact:
      return "exact";
    case AngleDerivative::kSpatialGradient:
      return "spatial_gradient";
    case AngleDerivative::kFiniteDifference:
      return "finite_difference";
  }
  return "unknown";
}

SupportMask parse_support_mask(std::string_view name) {
  if (name == "full_square") return SupportMask::kFullSquare;
  if (name == "inscribed_disk") return SupportMask::kInscribedDisk;
  throw InvalidArgument("unknown support mask '" + std::string(name) + "'");
}

AngleDerivative parse_angle_derivative(std::string_view name) {
  if (name == "exact") return AngleDerivative::kExact;
  if (name == "spatial_gradient") return AngleDerivative::kSpatialGradient;
  if (name == "finite_difference") return AngleDerivative::kFiniteDifference;
  throw InvalidArgument("unknown angle derivative mode '" + std::string(name) + "'");
}

}  // namespace calred
