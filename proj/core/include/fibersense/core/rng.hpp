#pragma once

#include <cstdint>
#include <string_view>

namespace fibersense::core {

/// One SplitMix64 step applied to x: golden-ratio increment, then the
/// finalizer. A bijective 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for an independent stream. Streams are keyed by a textual tag and an
/// index so that worker/chunk layout never influences the values drawn.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

/// Deterministic uniform/normal variate stream.
///
/// The engine is SplitMix64 (a Weyl sequence through the mix64 finalizer): 8
/// bytes of state, so thousands of per-channel streams stay cache resident.
/// Uniforms and normals are produced here rather than through the <random>
/// distributions, whose algorithms are implementation-defined, so a given
/// seed yields the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

  std::uint64_t next_u64() {
    const std::uint64_t out = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open_low() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }
  /// Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace fibersense::core
