#pragma once

#include "calred/denoise.hpp"

#include <string>

namespace calred {

class ExternalDenoiserError : public Error {
 public:
  enum class Reason { kNotConfigured, kSpawnFailed, kNonZeroExit, kKilledBySignal, kTimeout, kMissingOutput, kMalformedOutput, kShapeMismatch };

  ExternalDenoiserError(Reason reason, const std::string& message, int exit_code = 0)
      : Error(message), reason_(reason), exit_code_(exit_code) {}

  Reason reason() const { return reason_; }
  /// Exit status for kNonZeroExit, signal number for kKilledBySignal.
  int exit_code() const { return exit_code_; }

 private:
  Reason reason_;
  int exit_code_;
};

std::string_view to_string(ExternalDenoiserError::Reason reason);

/// Runs `spec.command + [input.npy, output.npy, sigma]` in a scratch
/// directory. The input is written as '<f4'; the output must be a 2-D NPY of
/// the same shape. The child is killed once spec.timeout_seconds elapses.
DenoiseResult external_denoise(const DenoiserSpec& spec, const ImageXd& x);

/// Formats sigma the way it is passed on the command line.
std::string format_sigma(double sigma);

}  // namespace calred
