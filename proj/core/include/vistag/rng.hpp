#pragma once

#include <cstdint>

namespace vistag {

/// Counter-based deterministic generator (SplitMix64 core). The stream is a
/// pure function of (seed, counter), so equal seeds give equal draws on every
/// platform, and sub-streams can be derived without touching the parent.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be > 0.
  std::int64_t uniform_int(std::int64_t n);
  /// Standard normal via Box-Muller (second value of each pair is cached).
  double normal();
  /// Bernoulli draw.
  bool flip(double p);

  /// Independent sub-stream keyed on up to three values. Used to make seeded
  /// sampling a function of (seed, clip id, step) rather than call order.
  Rng derive(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t mix(std::uint64_t z);

private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace vistag
