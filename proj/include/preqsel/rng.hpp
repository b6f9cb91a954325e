// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <cstdint>

namespace preqsel {

/// Counter-based pseudo-random generator keyed by (seed, replication, stream).
///
/// The state walks a splitmix64 sequence whose starting point is a hash of
/// the key triple, so replications and streams are mutually independent and
/// insensitive to the order in which they are consumed. Normal variates use
/// the trigonometric Box-Muller transform (both outputs consumed), which
/// keeps draws reproducible across platforms up to libm rounding.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t replication = 0,
             std::uint64_t stream = 0) {
    std::uint64_t key = mix(seed ^ 0x8f1bbcdcbfa53e0bULL);
    key = mix(key + 0x9e3779b97f4a7c15ULL * (replication + 1));
    key = mix(key + 0xbf58476d1ce4e5b9ULL * (stream + 1));
    state_ = key;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in (0, 1]; never returns 0, so log() of the result is safe.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal deviate.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double next_normal(double mean, double stddev) {
    return mean + stddev * next_normal();
  }

 private:
  static constexpr double pi() { return 3.14159265358979323846; }

  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace preqsel
