#pragma once

#include <cstdint>

#include "scynet/types.hpp"

namespace scynet {

/// Counter-mode expansion of a 32-byte seed through SHA-256. Identical seeds
/// produce identical streams on every platform.
class DigestRng {
 public:
  explicit DigestRng(const Digest& seed) : seed_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, bound). Rejection sampling, no modulo bias. bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// True with probability exactly p.num / p.den (p.den > 0, p <= 1).
  bool bernoulli(const Rational& p) { return uniform_below(p.den) < p.num; }

 private:
  void refill();

  Digest seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  std::size_t available_ = 0;
};

}  // namespace scynet
