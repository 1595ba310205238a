#include "calred/external.hpp"
#include "calred/npy.hpp"
#include "calred/parallel.hpp"
#include "calred/rng.hpp"
#include "calred/simkit.hpp"
#include "calred/solvers.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kSolverAbort = 3, kDenoiserFailure = 4 };

// ---------------------------------------------------------------------------
// Formatting and small file formats

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Round-trips through strtod.
std::string exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE || std::isnan(v))
    throw calred::InvalidArgument(what + ": cannot parse '" + text + "' as a number");
  return v;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw calred::Error("SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string angles_csv(const calred::AnglesXd& a) {
  std::string out = "index,angle_deg\n";
  for (Eigen::Index i = 0; i < a.size(); ++i) out += std::to_string(i) + "," + fixed6(a(i)) + "\n";
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, sep)) fields.push_back(f);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

// Reads the angle_deg column of a CSV with a header row. A file whose header
// has no angle_deg column uses its last column.
calred::AnglesXd read_angles_csv(const fs::path& path) {
  std::stringstream in(calred::read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw calred::InvalidArgument(path.string() + ": empty angle file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::size_t column = header.size() - 1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "angle_deg") column = i;
  std::vector<double> values;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() <= column)
      throw calred::InvalidArgument(path.string() + ":" + std::to_string(row) + ": missing angle column");
    values.push_back(parse_real(fields[column], path.string() + ":" + std::to_string(row)));
  }
  if (values.empty()) throw calred::InvalidArgument(path.string() + ": no angles");
  calred::AnglesXd a(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) a(static_cast<Eigen::Index>(i)) = values[i];
  calred::require_finite(a, path.c_str());
  return a;
}

std::string optional_field(const std::optional<double>& v) { return v ? fixed6(*v) : ""; }

std::string trace_csv(const calred::RunTrace& trace) {
  std::string out = "k,objective,red_penalty,snr_db,angle_rmse_deg,elapsed_ms\n";
  for (const auto& r : trace) {
    out += std::to_string(r.k) + "," + fixed6(r.objective) + "," + optional_field(r.red_penalty) + "," +
           optional_field(r.snr_db) + "," + optional_field(r.angle_rmse_deg) + "," + fixed6(r.elapsed_ms) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv) {
    doc_["tool"] = "calred";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["started_at"] = utc_timestamp();
    doc_["argv"] = std::move(argv);
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void input(const fs::path& path) { doc_["inputs"].push_back(entry(path, calred::read_file(path))); }

  void output(const fs::path& path, const std::string& bytes) {
    calred::write_file_atomic(path, bytes);
    doc_["outputs"].push_back(entry(path, bytes));
  }

  void write(const fs::path& path) { calred::write_file_atomic(path, doc_.dump(2) + "\n"); }

 private:
  static json entry(const fs::path& path, const std::string& bytes) {
    return json{{"path", path.string()}, {"sha256", sha256_hex(bytes)}};
  }

  json doc_;
};

fs::path with_suffix(const std::string& prefix, const char* suffix) { return fs::path(prefix + suffix); }

// ---------------------------------------------------------------------------
// Options shared by simulate and reconstruct

struct ProjectorOptions {
  int detectors = 0;  // 0: smallest odd >= n sqrt(2)
  std::string mask = "inscribed_disk";
  std::string angle_derivative = "spatial_gradient";

  void add(CLI::App& app) {
    app.add_option("--detectors", detectors, "Detector bins (odd); 0 selects the smallest odd >= n*sqrt(2)")
        ->capture_default_str();
    app.add_option("--mask", mask, "Support mask: inscribed_disk | full_square")->capture_default_str();
    app.add_option("--angle-derivative", angle_derivative,
                   "Angle derivative: spatial_gradient | exact | finite_difference")
        ->capture_default_str();
  }

  calred::ProjectorConfig resolve(int n) const {
    calred::ProjectorConfig cfg = calred::ProjectorConfig::for_size(n);
    if (detectors != 0) cfg.num_detectors = detectors;
    cfg.mask = calred::parse_support_mask(mask);
    cfg.angle_derivative = calred::parse_angle_derivative(angle_derivative);
    cfg.validate();
    return cfg;
  }

  void echo(std::vector<std::string>& argv) const {
    argv.insert(argv.end(), {"--detectors", std::to_string(detectors), "--mask", mask, "--angle-derivative",
                             angle_derivative});
  }
};

json projector_json(const calred::ProjectorConfig& cfg) {
  return json{{"n", cfg.n},
              {"num_detectors", cfg.num_detectors},
              {"mask", calred::to_string(cfg.mask)},
              {"angle_derivative", calred::to_string(cfg.angle_derivative)}};
}

// ---------------------------------------------------------------------------
// phantom

struct PhantomOptions {
  int n = 128;
  std::string out;
};

int cmd_phantom(const PhantomOptions& o) {
  if (o.n < calred::kMinPhantomSize)
    throw calred::InvalidArgument("--n must be >= " + std::to_string(calred::kMinPhantomSize));
  Manifest manifest("phantom", {"phantom", "--n", std::to_string(o.n), "--out", o.out});
  manifest["config"] = json{{"n", o.n}, {"phantom", "modified_shepp_logan"}};
  manifest.output(o.out, calred::encode_npy_f32(calred::shepp_logan(o.n)));
  manifest.write(fs::path(o.out).replace_extension(".manifest.json"));
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string image;
  int num_angles = 90;
  double angle_sd = 0.0;
  std::string snr = "inf";
  std::uint64_t seed = 0;
  ProjectorOptions projector;
  std::string out;

  std::vector<std::string> argv() const {
    std::vector<std::string> a{"simulate", "--image", image, "--num-angles", std::to_string(num_angles),
                               "--angle-sd", exact(angle_sd), "--snr", snr, "--seed", std::to_string(seed)};
    projector.echo(a);
    a.insert(a.end(), {"--out", out});
    return a;
  }
};

int cmd_simulate(const SimulateOptions& o) {
  if (o.num_angles < 1) throw calred::InvalidArgument("--num-angles must be >= 1");
  if (!(o.angle_sd >= 0)) throw calred::InvalidArgument("--angle-sd must be >= 0");
  const double snr = parse_real(o.snr, "--snr");

  Manifest manifest("simulate", o.argv());
  const calred::ImageXd x = calred::read_npy(o.image);
  manifest.input(o.image);
  if (x.rows() != x.cols()) throw calred::InvalidArgument(o.image + ": image must be square");
  const calred::ProjectorConfig pcfg = o.projector.resolve(static_cast<int>(x.rows()));
  const calred::RadonProjector<double> op(pcfg);

  const calred::AnglesXd nominal = calred::half_circle_angles(o.num_angles);
  const calred::AnglesXd truth =
      calred::perturb_angles(nominal, o.angle_sd, calred::derive_seed(o.seed, calred::Stream::kAngles));
  const calred::SinogramXd y =
      calred::synth_sinogram(op, x, truth, snr, calred::derive_seed(o.seed, calred::Stream::kSinogramNoise));

  manifest["seed"] = o.seed;
  manifest["config"] = json{{"experiment",
                             {{"n", pcfg.n},
                              {"num_angles", o.num_angles},
                              {"angle_span_deg", {0.0, 180.0}},
                              {"angle_noise_sd_deg", o.angle_sd},
                              {"input_snr_db", o.snr},
                              {"seed", o.seed}}},
                            {"projector", projector_json(pcfg)}};
  manifest.output(with_suffix(o.out, ".sino.npy"), calred::encode_npy_f32(y));
  manifest.output(with_suffix(o.out, ".angles_true.csv"), angles_csv(truth));
  manifest.output(with_suffix(o.out, ".angles_nominal.csv"), angles_csv(nominal));
  manifest.write(with_suffix(o.out, ".manifest.json"));
  return kOk;
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructOptions {
  std::string method = "cal_red";
  std::string sino;
  std::string angles;
  int n = 0;
  ProjectorOptions projector;
  std::string gt_image;
  std::string gt_angles;
  int iterations = 100;
  std::string gamma_x;
  std::string gamma_theta;
  double tau_x = 0.0;
  double tau_theta = 0.0;
  bool no_accelerate = false;
  std::string denoiser = "identity";
  double sigma = 0.0;
  std::string gaussian_std;
  std::string tv_weight;
  int tv_iterations = calred::kDefaultTvIterations;
  double tv_dual_step = calred::kDefaultTvDualStep;
  double denoiser_timeout = 60.0;
  std::vector<std::string> denoiser_command;
  std::uint64_t seed = 0;
  std::string out;

  std::vector<std::string> argv() const {
    std::vector<std::string> a{"reconstruct", "--method", method, "--sino", sino, "--angles", angles, "--n",
                               std::to_string(n)};
    projector.echo(a);
    if (!gt_image.empty()) a.insert(a.end(), {"--gt-image", gt_image});
    if (!gt_angles.empty()) a.insert(a.end(), {"--gt-angles", gt_angles});
    a.insert(a.end(), {"--iterations", std::to_string(iterations)});
    if (!gamma_x.empty()) a.insert(a.end(), {"--gamma-x", gamma_x});
    if (!gamma_theta.empty()) a.insert(a.end(), {"--gamma-theta", gamma_theta});
    a.insert(a.end(), {"--tau-x", exact(tau_x), "--tau-theta", exact(tau_theta)});
    if (no_accelerate) a.push_back("--no-accelerate");
    a.insert(a.end(), {"--denoiser", denoiser, "--sigma", exact(sigma)});
    if (!gaussian_std.empty()) a.insert(a.end(), {"--gaussian-std", gaussian_std});
    if (!tv_weight.empty()) a.insert(a.end(), {"--tv-weight", tv_weight});
    a.insert(a.end(), {"--tv-iterations", std::to_string(tv_iterations), "--tv-dual-step", exact(tv_dual_step),
                       "--denoiser-timeout", exact(denoiser_timeout), "--seed", std::to_string(seed), "--out",
                       out});
    if (!denoiser_command.empty()) {
      a.push_back("--");
      a.insert(a.end(), denoiser_command.begin(), denoiser_command.end());
    }
    return a;
  }
};

std::optional<double> optional_real(const std::string& text, const std::string& what) {
  if (text.empty()) return std::nullopt;
  return parse_real(text, what);
}

json solver_json(const calred::SolverConfig& cfg, const calred::StepSizes& steps) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"method", calred::to_string(cfg.method)},
              {"iterations", cfg.iterations},
              {"accelerate", cfg.accelerate},
              {"gamma_x", opt(cfg.gamma_x)},
              {"gamma_theta", opt(cfg.gamma_theta)},
              {"tau_x", cfg.tau_x},
              {"tau_theta", cfg.tau_theta},
              {"seed", cfg.seed},
              {"resolved",
               {{"gamma_x", steps.gamma_x}, {"gamma_theta", steps.gamma_theta}, {"lipschitz", steps.lipschitz}}},
              {"denoiser",
               {{"kind", calred::to_string(cfg.denoiser.kind)},
                {"sigma", cfg.denoiser.sigma},
                {"gaussian_std", cfg.denoiser.effective_gaussian_std()},
                {"tv_weight", cfg.denoiser.effective_tv_weight()},
                {"tv_iterations", cfg.denoiser.tv_iterations},
                {"tv_dual_step", cfg.denoiser.tv_dual_step},
                {"command", cfg.denoiser.command},
                {"timeout_seconds", cfg.denoiser.timeout_seconds}}}};
}

int cmd_reconstruct(const ReconstructOptions& o) {
  calred::SolverConfig cfg;
  cfg.method = calred::parse_method(o.method);
  cfg.iterations = o.iterations;
  cfg.gamma_x = optional_real(o.gamma_x, "--gamma-x");
  cfg.gamma_theta = optional_real(o.gamma_theta, "--gamma-theta");
  cfg.tau_x = o.tau_x;
  cfg.tau_theta = o.tau_theta;
  cfg.accelerate = !o.no_accelerate;
  cfg.seed = o.seed;
  cfg.denoiser.kind = calred::parse_denoiser_kind(o.denoiser);
  cfg.denoiser.sigma = o.sigma;
  cfg.denoiser.gaussian_std = optional_real(o.gaussian_std, "--gaussian-std");
  cfg.denoiser.tv_weight = optional_real(o.tv_weight, "--tv-weight");
  cfg.denoiser.tv_iterations = o.tv_iterations;
  cfg.denoiser.tv_dual_step = o.tv_dual_step;
  cfg.denoiser.timeout_seconds = o.denoiser_timeout;
  cfg.denoiser.command = o.denoiser_command;
  cfg.validate();
  if (o.n < 2) throw calred::InvalidArgument("--n must be >= 2");

  Manifest manifest("reconstruct", o.argv());
  const calred::ProjectorConfig pcfg = o.projector.resolve(o.n);
  const calred::RadonProjector<double> op(pcfg);
  const calred::SinogramXd y = calred::read_npy(o.sino);
  manifest.input(o.sino);
  const calred::AnglesXd nominal = read_angles_csv(o.angles);
  manifest.input(o.angles);

  calred::GroundTruth truth;
  if (!o.gt_image.empty()) {
    truth.image = calred::read_npy(o.gt_image);
    manifest.input(o.gt_image);
  }
  if (!o.gt_angles.empty()) {
    truth.angles = read_angles_csv(o.gt_angles);
    manifest.input(o.gt_angles);
  }

  const calred::RunResult result = calred::run(op, y, nominal, cfg, truth);

  manifest["seed"] = o.seed;
  manifest["config"] = json{{"solver", solver_json(cfg, result.steps)}, {"projector", projector_json(pcfg)}};
  manifest.output(with_suffix(o.out, ".image.npy"), calred::encode_npy_f32(result.image));
  if (calred::calibrates_angles(cfg.method))
    manifest.output(with_suffix(o.out, ".angles_est.csv"), angles_csv(result.angles));
  manifest.output(with_suffix(o.out, ".trace.csv"), trace_csv(result.trace));
  manifest.write(with_suffix(o.out, ".manifest.json"));
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string image;
  std::string gt_image;
  std::string angles_est;
  std::string angles_true;
};

int cmd_eval(const EvalOptions& o) {
  if (o.angles_est.empty() != o.angles_true.empty())
    throw calred::InvalidArgument("--angles-est and --angles-true must be given together");
  const calred::ImageXd x = calred::read_npy(o.image);
  const calred::ImageXd gt = calred::read_npy(o.gt_image);
  if (x.rows() != gt.rows() || x.cols() != gt.cols())
    throw calred::InvalidArgument("image and ground truth have different shapes");
  std::string report = "snr_db=" + fixed6(calred::snr_db(x, gt)) + "\n";
  if (!o.angles_est.empty()) {
    const calred::AnglesXd est = read_angles_csv(o.angles_est);
    const calred::AnglesXd tru = read_angles_csv(o.angles_true);
    if (est.size() != tru.size()) throw calred::InvalidArgument("angle files have different lengths");
    report += "angle_rmse_deg=" + fixed6(calred::rmse_deg(est, tru)) + "\n";
  }
  std::cout << report;
  return kOk;
}

// ---------------------------------------------------------------------------
// rerun

int dispatch(const std::vector<std::string>& args);

struct RerunOptions {
  std::string manifest;
  std::string out;
  bool skip_digest_check = false;
};

int cmd_rerun(const RerunOptions& o) {
  json doc;
  try {
    doc = json::parse(calred::read_file(o.manifest));
  } catch (const json::exception& e) {
    throw calred::InvalidArgument(o.manifest + ": not a manifest: " + e.what());
  }
  if (!doc.contains("argv") || !doc["argv"].is_array())
    throw calred::InvalidArgument(o.manifest + ": manifest has no argv");
  if (!o.skip_digest_check) {
    for (const auto& in : doc.value("inputs", json::array())) {
      const std::string path = in.at("path");
      if (sha256_hex(calred::read_file(path)) != in.at("sha256").get<std::string>())
        throw calred::IoError(path + ": content differs from the digest recorded in " + o.manifest);
    }
  }
  std::vector<std::string> argv = doc["argv"].get<std::vector<std::string>>();
  if (!o.out.empty()) {
    for (std::size_t i = 0; i + 1 < argv.size() && argv[i] != "--"; ++i)
      if (argv[i] == "--out") argv[i + 1] = o.out;
  }
  return dispatch(argv);
}

// ---------------------------------------------------------------------------

int exit_code_for_abort(const calred::SolverAbort& abort) {
  try {
    if (abort.cause()) std::rethrow_exception(abort.cause());
  } catch (const calred::ExternalDenoiserError&) {
    return kDenoiserFailure;
  } catch (...) {
  }
  return kSolverAbort;
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Calibrated RED tomography toolkit", "calred"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");

  PhantomOptions phantom;
  CLI::App* ph = app.add_subcommand("phantom", "Write a modified Shepp-Logan phantom");
  ph->add_option("--n", phantom.n, "Image side (>= 16)")->capture_default_str();
  ph->add_option("--out", phantom.out, "Output .npy")->required();

  SimulateOptions sim;
  CLI::App* si = app.add_subcommand("simulate", "Synthesize a noisy sinogram at perturbed angles");
  si->add_option("--image", sim.image, "Ground-truth image (.npy, square)")->required();
  si->add_option("--num-angles", sim.num_angles, "Nominal angles on [0, 180)")->capture_default_str();
  si->add_option("--angle-sd", sim.angle_sd, "Angle perturbation SD (degrees)")->capture_default_str();
  si->add_option("--snr", sim.snr, "Input SNR in dB; inf disables noise")->capture_default_str();
  si->add_option("--seed", sim.seed, "Experiment seed")->capture_default_str();
  sim.projector.add(*si);
  si->add_option("--out", sim.out, "Output prefix")->required();

  ReconstructOptions rec;
  CLI::App* re = app.add_subcommand("reconstruct", "Reconstruct an image (and angles for cal_* methods)");
  re->add_option("--method", rec.method, "fbp | lsm | fista | red | cal_lsm | cal_fista | cal_red")
      ->capture_default_str();
  re->add_option("--sino", rec.sino, "Sinogram (.npy, angles x detectors)")->required();
  re->add_option("--angles", rec.angles, "Nominal angles (.csv)")->required();
  re->add_option("--n", rec.n, "Image side")->required();
  rec.projector.add(*re);
  re->add_option("--gt-image", rec.gt_image, "Ground-truth image for the SNR trace");
  re->add_option("--gt-angles", rec.gt_angles, "Ground-truth angles for the RMSE trace");
  re->add_option("--iterations", rec.iterations)->capture_default_str();
  re->add_option("--gamma-x", rec.gamma_x, "Image step (default 0.9 / (L + tau_x))");
  re->add_option("--gamma-theta", rec.gamma_theta, "Angle step; 0 freezes the angles (default from curvature)");
  re->add_option("--tau-x", rec.tau_x, "RED weight, or the TV weight for fista / cal_fista")->capture_default_str();
  re->add_option("--tau-theta", rec.tau_theta, "Pull of the angles towards nominal")->capture_default_str();
  re->add_flag("--no-accelerate", rec.no_accelerate, "Disable Nesterov momentum");
  re->add_option("--denoiser", rec.denoiser, "identity | gaussian | tv | external")->capture_default_str();
  re->add_option("--sigma", rec.sigma, "Denoiser noise level (0-255 scale)")->capture_default_str();
  re->add_option("--gaussian-std", rec.gaussian_std, "Gaussian std in pixels (default sigma / 10)");
  re->add_option("--tv-weight", rec.tv_weight, "TV denoiser weight (default 0.5 sigma / 255)");
  re->add_option("--tv-iterations", rec.tv_iterations)->capture_default_str();
  re->add_option("--tv-dual-step", rec.tv_dual_step)->capture_default_str();
  re->add_option("--denoiser-timeout", rec.denoiser_timeout, "Seconds per external call")->capture_default_str();
  re->add_option("--seed", rec.seed, "Seed for the power iteration")->capture_default_str();
  re->add_option("--out", rec.out, "Output prefix")->required();
  re->add_option("denoiser-command", rec.denoiser_command, "External denoiser argv, after --");

  EvalOptions ev;
  CLI::App* e = app.add_subcommand("eval", "Print snr_db and angle_rmse_deg");
  e->add_option("--image", ev.image)->required();
  e->add_option("--gt-image", ev.gt_image)->required();
  e->add_option("--angles-est", ev.angles_est);
  e->add_option("--angles-true", ev.angles_true);

  RerunOptions rr;
  CLI::App* r = app.add_subcommand("rerun", "Repeat the command recorded in a manifest");
  r->add_option("manifest", rr.manifest)->required();
  r->add_option("--out", rr.out, "Replace the recorded output path or prefix");
  r->add_flag("--skip-digest-check", rr.skip_digest_check);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  if (*ph) return cmd_phantom(phantom);
  if (*si) return cmd_simulate(sim);
  if (*re) return cmd_reconstruct(rec);
  if (*e) return cmd_eval(ev);
  return cmd_rerun(rr);
}

int configure_threads() {
  const char* env = std::getenv("CALRED_THREADS");
  if (env == nullptr || *env == '\0') return kOk;
  char* end = nullptr;
  const long threads = std::strtol(env, &end, 10);
  if (*end != '\0' || threads < 1) {
    std::cerr << "error: CALRED_THREADS must be a positive integer, got '" << env << "'\n";
    return kUsage;
  }
  calred::set_max_threads(static_cast<int>(threads));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const int code = configure_threads(); code != kOk) return code;
  try {
    return dispatch(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const calred::SolverAbort& err) {
    std::cerr << "error: solver aborted: " << err.what() << "\n";
    return exit_code_for_abort(err);
  } catch (const calred::ExternalDenoiserError& err) {
    std::cerr << "error: external denoiser: " << err.what() << "\n";
    return kDenoiserFailure;
  } catch (const calred::IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const calred::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  }
}
