#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace swarmwatch {

/// IPv4 address held in host byte order.
class Ipv4 {
public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  constexpr std::uint32_t value() const { return value_; }

  /// Dotted quad; rejects leading '+', empty octets and values above 255.
  static std::optional<Ipv4> parse(std::string_view text);
  std::string to_string() const;

  /// Private, loopback, "this network" and multicast/reserved space.
  bool is_bogon() const;

  friend constexpr auto operator<=>(Ipv4, Ipv4) = default;

private:
  std::uint32_t value_ = 0;
};

struct Endpoint {
  Ipv4 ip;
  std::uint16_t port = 0;

  std::string to_string() const;
  friend constexpr auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// 20-byte SHA-1 digest (infohashes, piece hashes, peer ids).
class Digest20 {
public:
  static constexpr std::size_t size = 20;
  using Bytes = std::array<std::uint8_t, size>;

  constexpr Digest20() = default;
  constexpr explicit Digest20(const Bytes& bytes) : bytes_(bytes) {}

  /// Requires exactly 20 bytes.
  static std::optional<Digest20> from_bytes(std::string_view raw);
  /// Requires exactly 40 hex digits, either case.
  static std::optional<Digest20> from_hex(std::string_view hex);

  const Bytes& bytes() const { return bytes_; }
  std::string_view view() const {
    return {reinterpret_cast<const char*>(bytes_.data()), bytes_.size()};
  }
  std::string hex() const;

  friend constexpr auto operator<=>(const Digest20&, const Digest20&) = default;

private:
  Bytes bytes_{};
};

using Infohash = Digest20;
using PeerId = Digest20;

std::string to_hex(std::string_view raw);

} // namespace swarmwatch

template <>
struct std::hash<swarmwatch::Ipv4> {
  std::size_t operator()(swarmwatch::Ipv4 ip) const noexcept { return std::hash<std::uint32_t>{}(ip.value()); }
};

template <>
struct std::hash<swarmwatch::Digest20> {
  std::size_t operator()(const swarmwatch::Digest20& d) const noexcept {
    return std::hash<std::string_view>{}(d.view());
  }
};
