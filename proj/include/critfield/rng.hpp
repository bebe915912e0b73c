#pragma once

// Counter-based random numbers. Every draw is a pure function of its key, so
// results never depend on scheduling or on how many draws happened before.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace critfield::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit mixing hash of an ordered tuple of words. Stable across versions.
inline constexpr std::uint64_t mix(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w + 0x2545f4914f6cdd1dULL));
  return h;
}

inline std::uint64_t double_bits(double x) {
  std::uint64_t b;
  static_assert(sizeof(b) == sizeof(x));
  __builtin_memcpy(&b, &x, sizeof(b));
  return b;
}

/// Uniform in the open interval (0,1) from the top 53 bits.
inline double to_open_unit(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals from one key (Box-Muller).
inline void normal_pair(std::uint64_t key, double& z0, double& z1) {
  const double u1 = to_open_unit(splitmix64(key));
  const double u2 = to_open_unit(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(t);
  z1 = r * std::sin(t);
}

/// Sequential standard normals for stream (seed, stream). Draw i is fixed by
/// (seed, stream, i) alone.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) : base_(mix({seed, stream})) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double z0;
    normal_pair(base_ + counter_++, z0, spare_);
    have_spare_ = true;
    return z0;
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace critfield::rng
