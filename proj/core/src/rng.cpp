#include "vistag/rng.hpp"

#include <cmath>

#include "vistag/errors.hpp"

namespace vistag {

std::uint64_t Rng::mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() {
  // 53 mantissa bits, value in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t n) {
  if (n <= 0) throw ContractError("Rng::uniform_int: n must be positive");
  return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

bool Rng::flip(double p) { return uniform() < p; }

Rng Rng::derive(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  std::uint64_t s = mix(seed_ ^ 0xA0761D6478BD642FULL);
  s = mix(s + a * 0xE7037ED1A0B428DBULL);
  s = mix(s + b * 0x8EBC6AF09C88C6E3ULL);
  s = mix(s + c * 0x589965CC75374CC3ULL);
  return Rng(s);
}

} // namespace vistag
