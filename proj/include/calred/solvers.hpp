#pragma once

#include "calred/denoise.hpp"
#include "calred/projector.hpp"

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace calred {

enum class Method { kFbp, kLsm, kFista, kRed, kCalLsm, kCalFista, kCalRed };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// True for the cal_* variants, which also update the projection angles.
bool calibrates_angles(Method method);

/// q_1 = 1, q_k = (1 + sqrt(1 + 4 q_{k-1}^2)) / 2.
double nesterov_q(int k);

struct SolverConfig {
  Method method = Method::kCalRed;
  // Step sizes; empty means "derive a default" (see resolve_step_sizes).
  std::optional<double> gamma_x;
  std::optional<double> gamma_theta;
  // RED weight; for fista / cal_fista this is the TV weight of the prox step.
  double tau_x = 0.0;
  // Tikhonov pull of the angles towards their nominal values.
  double tau_theta = 0.0;
  DenoiserSpec denoiser;
  int iterations = 100;
  bool accelerate = true;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kPowerIterations = 20;
inline constexpr double kGammaXSafety = 0.9;
inline constexpr double kGammaThetaSafety = 0.5;

/// Largest eigenvalue of H^T H at the given angles by power iteration from a
/// seeded positive start vector.
double estimate_lipschitz(const RadonProjector<double>& op, const AnglesXd& theta_deg, int iterations,
                          std::uint64_t seed);

/// Default angle step: kGammaThetaSafety / max_i ||d(H x)_i / d theta_i||^2,
/// i.e. a Gauss-Newton curvature bound for the separable angle problem at x.
double default_gamma_theta(const RadonProjector<double>& op, const ImageXd& x, const AnglesXd& theta_deg);

struct SolverState {
  ImageXd x;
  ImageXd s;
  AnglesXd theta;
  AnglesXd u;
  double q_prev = 1.0;
  double q = 1.0;
  int k = 0;

  /// (q_{k-1} - 1) / q_k
  double momentum() const { return (q_prev - 1.0) / q; }
};

/// Everything the per-iteration steps read but never modify.
struct Problem {
  const RadonProjector<double>& op;
  const SinogramXd& y;
  const AnglesXd& nominal;
};

/// Concrete step sizes after defaults are filled in.
struct StepSizes {
  double gamma_x = 0.0;
  double gamma_theta = 0.0;
  double lipschitz = 0.0;
};

StepSizes resolve_step_sizes(const SolverConfig& cfg, const Problem& problem, const ImageXd& x0);

/// Initial state: x = s = x0, theta = u = nominal, k = 0.
SolverState initial_state(const ImageXd& x0, const AnglesXd& nominal);

/// Moves the acceleration sequence to iteration k + 1.
void advance_iteration(SolverState& state, bool accelerate);

// Single steps. Each consumes the accelerated pair from the previous
// iteration and writes the new iterate plus its accelerated companion.

void theta_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps);
void red_x_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps);
void fista_x_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps);
void lsm_x_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps);

struct TraceRecord {
  int k = 0;
  double objective = 0.0;  // 1/2 ||y - H_theta x||^2 at (x^k, theta^k)
  std::optional<double> red_penalty;
  std::optional<double> snr_db;
  std::optional<double> angle_rmse_deg;
  double elapsed_ms = 0.0;
};

using RunTrace = std::vector<TraceRecord>;

struct RunResult {
  ImageXd image;
  AnglesXd angles;
  RunTrace trace;
  StepSizes steps;
};

struct GroundTruth {
  std::optional<ImageXd> image;
  std::optional<AnglesXd> angles;
};

/// Raised when a run cannot continue; carries the 1-based iteration index
/// (0 for failures during initialisation) and the original exception.
class SolverAbort : public Error {
 public:
  SolverAbort(int iteration, std::exception_ptr cause, const std::string& message)
      : Error(message), iteration_(iteration), cause_(std::move(cause)) {}
  int iteration() const { return iteration_; }
  const std::exception_ptr& cause() const { return cause_; }

 private:
  int iteration_;
  std::exception_ptr cause_;
};

/// Runs cfg.method on measurements y taken at unknown angles near `nominal`.
/// Iterative methods start from FBP at the nominal angles; cal_* methods
/// update the angles before the image in every iteration.
RunResult run(const RadonProjector<double>& op, const SinogramXd& y, const AnglesXd& nominal,
              const SolverConfig& cfg, const GroundTruth& truth = {});

}  // namespace calred
