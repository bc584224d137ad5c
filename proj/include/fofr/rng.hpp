#pragma once

#include <cstdint>
#include <random>

namespace fofr {

/// Generator identification string emitted in output metadata.
inline constexpr const char* kRngName = "mt19937_64+splitmix64-streams";

/// splitmix64 finalizer (Steele/Lea/Flood constants).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic stream derivation. A key is a 64-bit state; `child(i)`
/// derives an independent substream for index i:
///
///   StreamKey(seed).state == splitmix64(seed)
///   key.child(i).state    == splitmix64(key.state + GOLDEN * (i + 1))
///
/// with GOLDEN = 0x9e3779b97f4a7c15. Engines are std::mt19937_64 seeded
/// with the key state, so every draw is reproducible from (seed, path).
struct StreamKey {
  std::uint64_t state;

  explicit StreamKey(std::uint64_t seed) : state(splitmix64(seed)) {}

  StreamKey child(std::uint64_t index) const {
    StreamKey k(0);
    k.state = splitmix64(state + 0x9e3779b97f4a7c15ULL * (index + 1));
    return k;
  }
};

/// Inverse standard normal CDF (Wichura's AS241, double precision,
/// |relative error| < 1e-15 on (0,1)).
double normal_quantile(double p);

/// A seeded random stream with the distribution transforms used across the
/// project. Distributions are implemented on top of raw 64-bit engine output
/// so that results do not depend on the standard library's <random>
/// distribution implementations.
class RngStream {
 public:
  explicit RngStream(StreamKey key) : engine_(key.state) {}

  /// Uniform on the open interval (0,1): ((x >> 11) + 0.5) * 2^-53.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by 128-bit multiply (Lemire, unbiased enough
  /// for resampling at n << 2^64; bias < n / 2^64).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Standard normal via inverse-CDF of uniform01.
  double normal() { return normal_quantile(uniform01()); }

  /// Exponential(1).
  double exponential();

  /// +1 or -1 with probability 1/2 each (top bit of the engine word).
  double rademacher() {
    return (engine_() >> 63) ? 1.0 : -1.0;
  }

  /// Chi-square(1) as the square of a standard normal.
  double chisq1() {
    double z = normal();
    return z * z;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fofr
