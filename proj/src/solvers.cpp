#include "calred/solvers.hpp"

#include "calred/fbp.hpp"
#include "calred/fidelity.hpp"
#include "calred/rng.hpp"
#include "calred/simkit.hpp"

#include <chrono>
#include <cmath>

namespace calred {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kFbp:
      return "fbp";
    case Method::kLsm:
      return "lsm";
    case Method::kFista:
      return "fista";
    case Method::kRed:
      return "red";
    case Method::kCalLsm:
      return "cal_lsm";
    case Method::kCalFista:
      return "cal_fista";
    case Method::kCalRed:
      return "cal_red";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kFbp, Method::kLsm, Method::kFista, Method::kRed, Method::kCalLsm, Method::kCalFista,
                   Method::kCalRed})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

bool calibrates_angles(Method method) {
  return method == Method::kCalLsm || method == Method::kCalFista || method == Method::kCalRed;
}

double nesterov_q(int k) {
  if (k < 1) throw InvalidArgument("nesterov_q: k must be >= 1");
  double q = 1.0;
  for (int i = 2; i <= k; ++i) q = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
  return q;
}

void SolverConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (gamma_x && !(*gamma_x > 0)) throw InvalidArgument("gamma_x must be > 0");
  // gamma_theta = 0 is allowed: it freezes the angles at their nominal values.
  if (gamma_theta && !(*gamma_theta >= 0)) throw InvalidArgument("gamma_theta must be >= 0");
  if (!(tau_x >= 0)) throw InvalidArgument("tau_x must be >= 0");
  if (!(tau_theta >= 0)) throw InvalidArgument("tau_theta must be >= 0");
  denoiser.validate();
}

double estimate_lipschitz(const RadonProjector<double>& op, const AnglesXd& theta_deg, int iterations,
                          std::uint64_t seed) {
  if (iterations < 1) throw InvalidArgument("power iteration count must be >= 1");
  const int n = op.image_size();
  Rng rng(seed);
  ImageXd v(n, n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = 0.5 + rng.uniform();
  v = op.apply_mask(v);
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const ImageXd w = op.adjoint(op.forward(v, theta_deg), theta_deg);
    lambda = v.cwiseProduct(w).sum();
    const double norm = w.norm();
    if (norm == 0) return 0.0;
    v = w / norm;
  }
  return lambda;
}

double default_gamma_theta(const RadonProjector<double>& op, const ImageXd& x, const AnglesXd& theta_deg) {
  op.validate(x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta_deg.size(); ++i)
    worst = std::max(worst, op.angle_derivative(x, theta_deg(i)).squaredNorm());
  if (!(worst > 0)) return 0.0;
  return kGammaThetaSafety / worst;
}

StepSizes resolve_step_sizes(const SolverConfig& cfg, const Problem& problem, const ImageXd& x0) {
  StepSizes steps;
  if (cfg.gamma_x) {
    steps.gamma_x = *cfg.gamma_x;
  } else {
    steps.lipschitz =
        estimate_lipschitz(problem.op, problem.nominal, kPowerIterations, derive_seed(cfg.seed, Stream::kPowerIteration));
    steps.gamma_x = kGammaXSafety / (steps.lipschitz + cfg.tau_x);
  }
  if (calibrates_angles(cfg.method))
    steps.gamma_theta = cfg.gamma_theta ? *cfg.gamma_theta : default_gamma_theta(problem.op, x0, problem.nominal);
  return steps;
}

SolverState initial_state(const ImageXd& x0, const AnglesXd& nominal) {
  SolverState state;
  state.x = x0;
  state.s = x0;
  state.theta = nominal;
  state.u = nominal;
  return state;
}

void advance_iteration(SolverState& state, bool accelerate) {
  ++state.k;
  if (!accelerate) {
    state.q_prev = 1.0;
    state.q = 1.0;
    return;
  }
  // q_0 is taken as 1 so the first step carries no momentum.
  state.q_prev = state.k == 1 ? 1.0 : state.q;
  state.q = state.k == 1 ? 1.0 : 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * state.q_prev * state.q_prev));
}

void theta_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps) {
  AnglesXd g = grad_theta(problem.op, state.s, problem.y, state.u);
  if (cfg.tau_theta != 0) g += cfg.tau_theta * (state.u - problem.nominal);
  const AnglesXd theta_new = state.u - steps.gamma_theta * g;
  state.u = theta_new + state.momentum() * (theta_new - state.theta);
  state.theta = theta_new;
}

namespace {

void momentum_update(SolverState& state, ImageXd x_new) {
  state.s = x_new + state.momentum() * (x_new - state.x);
  state.x = std::move(x_new);
}

}  // namespace

void red_x_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps) {
  ImageXd g = grad_x(problem.op, state.s, problem.y, state.theta);
  if (cfg.tau_x != 0) {
    const ImageXd denoised = denoise(cfg.denoiser, state.s).image;
    g += cfg.tau_x * (state.s - denoised);
  }
  momentum_update(state, state.s - steps.gamma_x * g);
}

void fista_x_step(SolverState& state, const Problem& problem, const SolverConfig& cfg, const StepSizes& steps) {
  ImageXd z = state.s - steps.gamma_x * grad_x(problem.op, state.s, problem.y, state.theta);
  const double weight = steps.gamma_x * cfg.tau_x;
  // The prox of a zero functional is the identity.
  if (weight > 0) z = tv_prox(z, weight, cfg.denoiser.tv_iterations, cfg.denoiser.tv_dual_step);
  momentum_update(state, std::move(z));
}

void lsm_x_step(SolverState& state, const Problem& problem, const SolverConfig& /*cfg*/, const StepSizes& steps) {
  const ImageXd g = grad_x(problem.op, state.s, problem.y, state.theta);
  momentum_update(state, state.s - steps.gamma_x * g);
}

namespace {

TraceRecord make_record(int k, const ImageXd& x, const AnglesXd& theta, const Problem& problem,
                        const SolverConfig& cfg, const GroundTruth& truth,
                        std::chrono::steady_clock::time_point start) {
  TraceRecord rec;
  rec.k = k;
  rec.objective = data_fidelity(problem.op, x, problem.y, theta);
  if ((cfg.method == Method::kRed || cfg.method == Method::kCalRed) && cfg.tau_x != 0)
    rec.red_penalty = red_penalty(x, cfg.denoiser);
  if (truth.image) rec.snr_db = snr_db(x, *truth.image);
  if (truth.angles) rec.angle_rmse_deg = rmse_deg(theta, *truth.angles);
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

RunResult run(const RadonProjector<double>& op, const SinogramXd& y, const AnglesXd& nominal,
              const SolverConfig& cfg, const GroundTruth& truth) {
  cfg.validate();
  if (nominal.size() < 1) throw InvalidArgument("nominal angle set is empty");
  if (y.rows() != nominal.size() || y.cols() != op.num_detectors())
    throw DimensionError("sinogram is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) + ", expected " +
                         std::to_string(nominal.size()) + "x" + std::to_string(op.num_detectors()));
  require_finite(y, "sinogram");
  if (truth.image && (truth.image->rows() != op.image_size() || truth.image->cols() != op.image_size()))
    throw DimensionError("ground-truth image does not match the projector size");
  if (truth.angles && truth.angles->size() != nominal.size())
    throw DimensionError("ground-truth angle count does not match the nominal angles");

  const auto start = std::chrono::steady_clock::now();
  const Problem problem{op, y, nominal};
  RunResult result;
  const ImageXd x0 = fbp(op, y, nominal);

  if (cfg.method == Method::kFbp) {
    result.image = x0;
    result.angles = nominal;
    result.trace.push_back(make_record(1, x0, nominal, problem, cfg, truth, start));
    return result;
  }

  try {
    result.steps = resolve_step_sizes(cfg, problem, x0);
  } catch (const std::exception& e) {
    throw SolverAbort(0, std::current_exception(), std::string("initialisation failed: ") + e.what());
  }

  SolverState state = initial_state(x0, nominal);
  const bool calibrate = calibrates_angles(cfg.method);
  result.trace.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int k = 1; k <= cfg.iterations; ++k) {
    try {
      advance_iteration(state, cfg.accelerate);
      if (calibrate) theta_step(state, problem, cfg, result.steps);
      switch (cfg.method) {
        case Method::kLsm:
        case Method::kCalLsm:
          lsm_x_step(state, problem, cfg, result.steps);
          break;
        case Method::kFista:
        case Method::kCalFista:
          fista_x_step(state, problem, cfg, result.steps);
          break;
        case Method::kRed:
        case Method::kCalRed:
          red_x_step(state, problem, cfg, result.steps);
          break;
        case Method::kFbp:
          break;
      }
      result.trace.push_back(make_record(k, state.x, state.theta, problem, cfg, truth, start));
    } catch (const std::exception& e) {
      throw SolverAbort(k, std::current_exception(),
                        "iteration " + std::to_string(k) + " failed: " + e.what());
    }
  }
  result.image = std::move(state.x);
  result.angles = std::move(state.theta);
  return result;
}

}  // namespace calred
