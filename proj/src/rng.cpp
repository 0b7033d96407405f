#include "hmlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace hmlab {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t hash_label(std::string_view label) {
  // FNV-1a, then a finalizer so short labels spread over all bits.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

Rng::Rng(std::uint64_t seed, std::string_view label) : key_(mix64(seed ^ hash_label(label))) {}

Rng Rng::substream(std::string_view label) const { return Rng(mix64(key_ ^ hash_label(label))); }

Rng Rng::substream(std::uint64_t index) const { return Rng(mix64(key_ + kGolden * (index + 1))); }

std::uint64_t Rng::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp to stay inside (0, 1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace hmlab
