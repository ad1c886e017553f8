#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace moqd {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random stream. Distributions are hand-rolled on top of the raw
/// 64-bit output so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform index in [0, n). Lemire multiply-shift; n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives the seed of a named substream from the root seed. Streams are
/// identified by (name, iteration, index); this is the reproducibility
/// contract for the whole experiment harness.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                                    std::uint64_t iteration = 0,
                                    std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = root;
  splitmix64(state);
  state ^= h;
  splitmix64(state);
  state ^= iteration;
  splitmix64(state);
  state ^= index;
  return splitmix64(state);
}

inline Rng substream(std::uint64_t root, std::string_view name,
                     std::uint64_t iteration = 0, std::uint64_t index = 0) {
  return Rng(substream_seed(root, name, iteration, index));
}

}  // namespace moqd
