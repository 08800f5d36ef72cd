#pragma once

#include <cmath>
#include <cstdint>

namespace qcluster {

/// splitmix64 finalizer; bijective avalanche over 64 bits.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Derives an independent stream seed addressed by up to four indices.
/// Every logical draw site gets its own stream, so evaluation order and
/// threading never change the output.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0,
                                    std::uint64_t d = 0) noexcept {
  std::uint64_t h = seed;
  h = mix64(h + kGolden + a);
  h = mix64(h + kGolden + b);
  h = mix64(h + kGolden + c);
  h = mix64(h + kGolden + d);
  return h;
}

/// Deterministic splitmix64 draw stream. Not cryptographic; statistical
/// quality is ample for simulation use.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; two uniform draws per value.
  double next_gaussian() {
    double u1 = 1.0 - next_unit();  // (0, 1], keeps the log finite
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform in [0, bound); multiply-shift, bias < 2^-64 * bound.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  /// Uniform integer in [lo, hi] inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace qcluster
