#include "swarmwatch/net.hpp"

#include <charconv>

#include <fmt/format.h>

namespace swarmwatch {

std::optional<Ipv4> Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (text.empty() || text.front() != '.') return std::nullopt;
      text.remove_prefix(1);
    }
    if (text.empty() || text.front() < '0' || text.front() > '9') return std::nullopt;
    unsigned part = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), part);
    if (ec != std::errc{} || part > 255 || ptr - text.data() > 3) return std::nullopt;
    text.remove_prefix(static_cast<std::size_t>(ptr - text.data()));
    value = (value << 8) | part;
  }
  if (!text.empty()) return std::nullopt;
  return Ipv4{value};
}

std::string Ipv4::to_string() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xff, (value_ >> 8) & 0xff, value_ & 0xff);
}

bool Ipv4::is_bogon() const {
  const auto in = [this](std::uint32_t net, int prefix) {
    const std::uint32_t mask = prefix == 0 ? 0 : ~std::uint32_t{0} << (32 - prefix);
    return (value_ & mask) == net;
  };
  return in(0x00000000, 8)        // 0/8
         || in(0x0a000000, 8)     // 10/8
         || in(0x7f000000, 8)     // 127/8
         || in(0xac100000, 12)    // 172.16/12
         || in(0xc0a80000, 16)    // 192.168/16
         || in(0xe0000000, 4);    // 224/4
}

std::string Endpoint::to_string() const { return fmt::format("{}:{}", ip.to_string(), port); }

std::optional<Digest20> Digest20::from_bytes(std::string_view raw) {
  if (raw.size() != size) return std::nullopt;
  Bytes b{};
  for (std::size_t i = 0; i < size; ++i) b[i] = static_cast<std::uint8_t>(raw[i]);
  return Digest20{b};
}

namespace {
int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
} // namespace

std::optional<Digest20> Digest20::from_hex(std::string_view hex) {
  if (hex.size() != 2 * size) return std::nullopt;
  Bytes b{};
  for (std::size_t i = 0; i < size; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    b[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return Digest20{b};
}

std::string Digest20::hex() const { return to_hex(view()); }

std::string to_hex(std::string_view raw) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() * 2);
  for (unsigned char c : raw) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0x0f]);
  }
  return out;
}

} // namespace swarmwatch
