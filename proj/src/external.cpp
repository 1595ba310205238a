#include "calred/external.hpp"

#include "calred/npy.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace calred {

namespace fs = std::filesystem;

namespace {

// Scratch directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    const fs::path base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      fs::path candidate =
          base / ("calred-denoise-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
      std::error_code ec;
      if (fs::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw IoError("cannot create a scratch directory under " + base.string());
  }
  ~ScratchDir() {
    std::error_code ignored;
    fs::remove_all(path_, ignored);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

std::string_view to_string(ExternalDenoiserError::Reason reason) {
  using R = ExternalDenoiserError::Reason;
  switch (reason) {
    case R::kNotConfigured:
      return "not_configured";
    case R::kSpawnFailed:
      return "spawn_failed";
    case R::kNonZeroExit:
      return "nonzero_exit";
    case R::kKilledBySignal:
      return "killed_by_signal";
    case R::kTimeout:
      return "timeout";
    case R::kMissingOutput:
      return "missing_output";
    case R::kMalformedOutput:
      return "malformed_output";
    case R::kShapeMismatch:
      return "shape_mismatch";
  }
  return "unknown";
}

std::string format_sigma(double sigma) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", sigma);
  return buf;
}

DenoiseResult external_denoise(const DenoiserSpec& spec, const ImageXd& x) {
  using R = ExternalDenoiserError::Reason;
  if (spec.command.empty()) throw ExternalDenoiserError(R::kNotConfigured, "external denoiser command is empty");
  require_finite(x, "denoiser input");

  ScratchDir scratch;
  const fs::path input = scratch.path() / "input.npy";
  const fs::path output = scratch.path() / "output.npy";
  write_npy(input, x);

  std::vector<std::string> args = spec.command;
  args.push_back(input.string());
  args.push_back(output.string());
  args.push_back(format_sigma(spec.sigma));
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  // Exec failures are reported through a close-on-exec pipe.
  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0)
    throw ExternalDenoiserError(R::kSpawnFailed, std::string("pipe failed: ") + std::strerror(errno));
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    throw ExternalDenoiserError(R::kSpawnFailed, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::close(pipefd[0]);
    ::setpgid(0, 0);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(pipefd[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(pipefd[1]);
  int exec_errno = 0;
  const bool exec_failed = ::read(pipefd[0], &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno);
  ::close(pipefd[0]);

  int status = 0;
  if (exec_failed) {
    ::waitpid(pid, &status, 0);
    throw ExternalDenoiserError(R::kSpawnFailed, "cannot execute '" + args.front() + "': " + std::strerror(exec_errno));
  }

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(spec.timeout_seconds);
  auto poll = std::chrono::microseconds(200);
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR)
      throw ExternalDenoiserError(R::kSpawnFailed, std::string("waitpid failed: ") + std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw ExternalDenoiserError(R::kTimeout, "external denoiser '" + args.front() + "' timed out after " +
                                                   format_sigma(spec.timeout_seconds) + " s");
    }
    std::this_thread::sleep_for(poll);
    poll = std::min(poll * 2, std::chrono::microseconds(20000));
  }

  if (WIFSIGNALED(status))
    throw ExternalDenoiserError(R::kKilledBySignal,
                                "external denoiser killed by signal " + std::to_string(WTERMSIG(status)),
                                WTERMSIG(status));
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0)
    throw ExternalDenoiserError(R::kNonZeroExit,
                                "external denoiser exited with code " + std::to_string(WEXITSTATUS(status)),
                                WEXITSTATUS(status));
  if (!fs::exists(output))
    throw ExternalDenoiserError(R::kMissingOutput, "external denoiser produced no output file");

  ImageXd out;
  try {
    out = read_npy(output);
  } catch (const IoError& e) {
    throw ExternalDenoiserError(R::kMalformedOutput, std::string("unreadable denoiser output: ") + e.what());
  }
  if (out.rows() != x.rows() || out.cols() != x.cols())
    throw ExternalDenoiserError(R::kShapeMismatch, "denoiser output is " + std::to_string(out.rows()) + "x" +
                                                       std::to_string(out.cols()) + ", expected " +
                                                       std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  if (!out.allFinite()) throw ExternalDenoiserError(R::kMalformedOutput, "denoiser output contains non-finite values");

  DenoiseResult result;
  result.residual_norm = (x - out).norm();
  result.image = std::move(out);
  return result;
}

}  // namespace calred
