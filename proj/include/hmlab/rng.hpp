#pragma once

#include <cstdint>
#include <string_view>

namespace hmlab {

/// Counter-based generator. A stream is identified by (seed, label); draw i of
/// a stream is a pure function of (seed, label, i), so streams never interact
/// and results do not depend on evaluation order across streams.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view label);

  /// Derives an independent child stream.
  Rng substream(std::string_view label) const;
  Rng substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on (0, 1), never returns 0 or 1.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (portable across standard libraries).
  double normal();

  std::uint64_t key() const noexcept { return key_; }

 private:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t hash_label(std::string_view label);

}  // namespace hmlab
