#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace calred {

// Random streams are fully specified so that runs are reproducible across
// compilers and standard libraries:
//   * per-purpose seeds come from SplitMix64 applied to (seed + stream tag);
//   * each stream is a std::mt19937_64, whose output sequence the C++
//     standard fixes;
//   * uniforms take the top 53 bits: u = (next >> 11) * 2^-53, in [0, 1);
//   * standard normals use Box-Muller on pairs (u1, u2):
//       r = sqrt(-2 ln(1 - u1)), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2),
//     emitting z0 then z1.
// std::normal_distribution is avoided because its algorithm is unspecified.

enum class Stream : std::uint64_t {
  kAngles = 1,
  kSinogramNoise = 2,
  kPowerIteration = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed + static_cast<std::uint64_t>(stream));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phase);
    has_spare_ = true;
    return r * std::cos(phase);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace calred
