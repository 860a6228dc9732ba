#pragma once

// Per-cycle XML snapshot, one file per torrent per cycle:
//
//   <crawl torrent_id="1" infohash="<hex>" network="tracker" time="2013-08-12T12:00:00Z"
//          peer_count="3" seeders="5" leechers="7" euro_count="1" na_count="1" aus_count="0">
//     <peer ip="203.0.113.7" port="6881" bogon="false"/>
//   </crawl>
//
// peer_count is the number of <peer> elements. Regional counts cover peers
// whose address resolves in the geo table; bogons never resolve.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/crawler.hpp"
#include "swarmwatch/geodb.hpp"

namespace swarmwatch::crawler {

class SchemaViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SnapshotIoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SnapshotPeer {
  Endpoint endpoint;
  bool bogon = false;

  friend bool operator==(const SnapshotPeer&, const SnapshotPeer&) = default;
};

struct Snapshot {
  std::uint32_t torrent_id = 0;
  Infohash infohash;
  std::string network = "tracker";
  Instant time{};
  std::uint64_t peer_count = 0;
  std::uint32_t seeders = 0;
  std::uint32_t leechers = 0;
  std::uint64_t euro_count = 0;
  std::uint64_t na_count = 0;
  std::uint64_t aus_count = 0;
  std::vector<SnapshotPeer> peers;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Builds the snapshot for a finished cycle, classifying each peer's region
/// through `geo` at call time.
Snapshot make_snapshot(const CrawlCycleResult& result, const geodb::GeoTable& geo);

std::string render_snapshot_xml(const Snapshot& snapshot);
/// Throws SchemaViolation on any structural or attribute error, including a
/// peer_count that disagrees with the number of <peer> elements.
Snapshot parse_snapshot_xml(std::string_view xml);

/// "<infohash-hex>/<time-compact>.xml"
std::filesystem::path snapshot_relative_path(const Snapshot& snapshot);

/// Writes the rendered document under `root`; returns the full path.
std::filesystem::path write_snapshot(const std::filesystem::path& root, const Snapshot& snapshot);

} // namespace swarmwatch::crawler
