#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mjls {

// splitmix64 finalizer, used to derive independent stream seeds from a
// single master seed. Stream tags below; the scheme is part of the
// reproducibility contract and documented in the README.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + stream * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kChainStream = 1;  // Markov mode transitions
inline constexpr std::uint64_t kNoiseStream = 2;  // excitation noise
inline constexpr std::uint64_t kResetStream = 3;  // state re-randomization
inline constexpr std::uint64_t kEvalStream = 4;   // evaluation rollouts

// Seeded 64-bit PRNG. The generator is std::mt19937_64, whose output
// sequence is pinned by the C++ standard, so trajectories reproduce across
// builds and platforms. uniform01 maps the top 53 bits of one raw draw to
// [0, 1); gaussian consumes exactly two uniforms (Box-Muller, cosine
// branch, no cached spare), so draw counts per call are fixed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    // 1 - u1 lies in (0, 1], so the log is finite.
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
  }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::mt19937_64 engine_;
};

// Excitation noise added to the control input during learning. std = 0
// disables excitation.
struct NoiseSpec {
  enum class Kind { kGaussian };
  Kind kind = Kind::kGaussian;
  double std = 0.0;
  std::uint64_t seed = 0;
};

}  // namespace mjls
