#pragma once

// IPv4 range geolocation from an open CSV table:
//
//   range_start,range_end,country,state,city,isp,longitude,latitude
//
// Range bounds are dotted quads or unsigned 32-bit integers. Fields may be
// double-quoted ("Comcast Cable, Inc."). `state` is kept only for US and CA.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/net.hpp"

namespace swarmwatch::geodb {

struct GeoRecord {
  std::uint32_t range_start = 0;
  std::uint32_t range_end = 0;
  std::string country;
  std::string state;
  std::string city;
  std::string isp;
  double longitude = 0.0;
  double latitude = 0.0;

  bool contains(Ipv4 ip) const { return range_start <= ip.value() && ip.value() <= range_end; }
};

enum class Errc { parse_error, overlap_error, io_error };

class GeoError : public std::runtime_error {
public:
  GeoError(Errc code, const std::string& what, std::size_t line_a = 0, std::size_t line_b = 0)
      : std::runtime_error(what), code_(code), line_a_(line_a), line_b_(line_b) {}
  Errc code() const { return code_; }
  /// 1-based CSV line numbers (header is line 1); line_b only for overlaps.
  std::size_t line_a() const { return line_a_; }
  std::size_t line_b() const { return line_b_; }

private:
  Errc code_;
  std::size_t line_a_;
  std::size_t line_b_;
};

inline constexpr std::string_view csv_header = "range_start,range_end,country,state,city,isp,longitude,latitude";

/// Immutable, sorted, overlap-free range table.
class GeoTable {
public:
  GeoTable() = default;

  static GeoTable load(const std::filesystem::path& path);
  static GeoTable parse(std::string_view csv);
  /// Validates and sorts; OverlapError line numbers are 1-based indices into `records`.
  static GeoTable from_records(std::vector<GeoRecord> records);

  /// Binary search; bogon addresses are never found.
  const GeoRecord* lookup(Ipv4 ip) const;

  std::span<const GeoRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::string to_csv() const;

private:
  std::vector<GeoRecord> records_;
};

enum class Region { europe, north_america, australia, other, unknown };

std::string_view region_name(Region r);

/// Europe is the fixed list from europe_country_codes(); North America is US
/// and CA; Australia is AU; empty or malformed codes are Unknown.
Region classify_region(std::string_view country);

/// Sorted ISO-3166 alpha-2 codes counted as Europe.
std::span<const std::string_view> europe_country_codes();

/// English short name for display ("GR" -> "Greece"); the code itself if not listed.
std::string_view country_name(std::string_view code);

} // namespace swarmwatch::geodb
