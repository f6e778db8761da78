#include "scynet/types.hpp"

#include <charconv>

#include "scynet/codec.hpp"

namespace scynet {

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

Uuid Uuid::from_digest(const Digest& d) {
  Uuid u;
  std::copy_n(d.begin(), u.bytes.size(), u.bytes.begin());
  return u;
}

const char* to_string(ArithmeticErrc c) {
  switch (c) {
    case ArithmeticErrc::Overflow: return "ArithmeticOverflow";
    case ArithmeticErrc::Underflow: return "ArithmeticUnderflow";
  }
  return "ArithmeticError";
}

const char* to_string(DecodeErrc c) {
  switch (c) {
    case DecodeErrc::Truncated: return "Truncated";
    case DecodeErrc::TrailingBytes: return "TrailingBytes";
    case DecodeErrc::BadTag: return "BadTag";
    case DecodeErrc::BadValue: return "BadValue";
  }
  return "DecodeError";
}

Rational Rational::parse(std::string_view text) {
  auto parse_u64 = [](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("not an unsigned integer: " + std::string(s));
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return {parse_u64(text), 1};
  Rational r{parse_u64(text.substr(0, slash)), parse_u64(text.substr(slash + 1))};
  if (r.den == 0) throw std::invalid_argument("zero denominator");
  return r;
}

}  // namespace scynet
