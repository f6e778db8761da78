#include "scynet/rng.hpp"

#include <stdexcept>

#include "scynet/codec.hpp"
#include "scynet/crypto.hpp"

namespace scynet {

std::uint64_t DigestRng::next_u64() {
  if (available_ == 0) refill();
  return buffer_[4 - available_--];
}

void DigestRng::refill() {
  ByteWriter w;
  w.raw(seed_).u64(counter_++);
  const Digest block = sha256(w.data());
  ByteReader r(block);
  for (auto& word : buffer_) word = r.u64();
  available_ = buffer_.size();
}

std::uint64_t DigestRng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  // Largest multiple of bound representable; values at or above it are rejected.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x <= limit) return x % bound;
  }
}

}  // namespace scynet
