#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scynet {

/// Integer milliseconds since UNIX epoch. The simulator supplies all time.
using Timestamp = std::int64_t;
using Duration = std::int64_t;

inline constexpr Duration kMillisPerDay = 86'400'000;

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != N) {
    throw std::invalid_argument("hex value has wrong length");
  }
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

/// Error carrying a module-specific code. `to_string(Code)` must be visible
/// through ADL.
template <typename Code>
class CodedError : public std::runtime_error {
 public:
  explicit CodedError(Code code, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                          : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// 32-byte digest of an account's verification key.
struct AccountId {
  Digest bytes{};

  auto operator<=>(const AccountId&) const = default;
  std::string hex() const { return to_hex(bytes); }
  static AccountId from_hex(std::string_view hex) { return {array_from_hex<32>(hex)}; }
};

struct Uuid {
  std::array<std::uint8_t, 16> bytes{};

  auto operator<=>(const Uuid&) const = default;
  std::string hex() const { return to_hex(bytes); }
  static Uuid from_hex(std::string_view hex) { return {array_from_hex<16>(hex)}; }
  static Uuid from_digest(const Digest& d);
};

enum class ArithmeticErrc { Overflow, Underflow };
const char* to_string(ArithmeticErrc c);
using ArithmeticError = CodedError<ArithmeticErrc>;

/// Smallest indivisible token unit. All arithmetic is checked.
class TokenAmount {
 public:
  constexpr TokenAmount() = default;
  constexpr explicit TokenAmount(std::uint64_t v) : value_(v) {}

  constexpr std::uint64_t value() const noexcept { return value_; }
  constexpr bool is_zero() const noexcept { return value_ == 0; }

  TokenAmount operator+(TokenAmount o) const {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(value_, o.value_, &r)) throw ArithmeticError(ArithmeticErrc::Overflow);
    return TokenAmount(r);
  }
  TokenAmount operator-(TokenAmount o) const {
    if (o.value_ > value_) throw ArithmeticError(ArithmeticErrc::Underflow);
    return TokenAmount(value_ - o.value_);
  }
  TokenAmount operator*(std::uint64_t k) const {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(value_, k, &r)) throw ArithmeticError(ArithmeticErrc::Overflow);
    return TokenAmount(r);
  }
  TokenAmount& operator+=(TokenAmount o) { return *this = *this + o; }
  TokenAmount& operator-=(TokenAmount o) { return *this = *this - o; }

  constexpr auto operator<=>(const TokenAmount&) const = default;

 private:
  std::uint64_t value_ = 0;
};

/// Exact non-negative rational. Scores and fractions are never floats.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  Rational reduced() const {
    if (num == 0) return {0, 1};
    const std::uint64_t g = std::gcd(num, den);
    return {num / g, den / g};
  }

  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const unsigned __int128 lhs = static_cast<unsigned __int128>(a.num) * b.den;
    const unsigned __int128 rhs = static_cast<unsigned __int128>(b.num) * a.den;
    return lhs <=> rhs;
  }
  // Value equality: 1/2 == 2/4.
  friend bool operator==(const Rational& a, const Rational& b) { return (a <=> b) == 0; }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  static Rational parse(std::string_view text);
};

}  // namespace scynet
