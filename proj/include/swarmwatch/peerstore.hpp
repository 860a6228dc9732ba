#pragma once

// Peer observation store: one PeerRecord per IP with a membership bitfield
// over registered torrents, plus one SnapshotRecord per ingested snapshot.
//
// On-disk layout of a store directory:
//
//   registry.csv      monitored torrents (see registry.hpp)
//   log.jsonl         append-only mutation log, one JSON object per line
//   checkpoint.jsonl  compacted state as of log sequence number `seq`
//
// Opening a store loads the checkpoint and replays log entries with a higher
// sequence number; a torn final log line is ignored.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/geodb.hpp"
#include "swarmwatch/membership.hpp"
#include "swarmwatch/registry.hpp"
#include "swarmwatch/snapshot.hpp"
#include "swarmwatch/time.hpp"

namespace swarmwatch {

enum class StoreErrc { unknown_torrent_id, schema_violation, io_error, corrupt, bad_selector };

class StoreError : public std::runtime_error {
public:
  StoreError(StoreErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  StoreErrc code() const { return code_; }

private:
  StoreErrc code_;
};

struct PeerRecord {
  Ipv4 ip;
  std::string country;
  std::string state;
  std::string city;
  std::string isp;
  double longitude = 0.0;
  double latitude = 0.0;
  Membership membership;
  Instant first_seen{};
  Instant last_seen{};
  std::uint64_t hit_count = 0;
};

struct SnapshotRecord {
  Instant time{};
  std::string network;
  std::uint64_t peer_count = 0;
  std::uint32_t torrent_id = 0;
  std::uint64_t euro_count = 0;
  std::uint64_t na_count = 0;
  std::uint64_t aus_count = 0;

  friend bool operator==(const SnapshotRecord&, const SnapshotRecord&) = default;
};

struct IngestStats {
  std::size_t files = 0;
  std::size_t deduped = 0;
  std::size_t peers_upserted = 0;
  std::size_t new_peers = 0;
  std::size_t bogons_skipped = 0;

  IngestStats& operator+=(const IngestStats& o);
};

struct PeerFilter {
  std::optional<std::string> country;
  std::optional<std::string> state;
  std::optional<std::string> city;
  std::optional<std::string> isp;
  std::optional<Membership> membership;
  SetMode membership_mode = SetMode::union_;

  bool matches(const PeerRecord& peer) const;
};

class PeerStore {
public:
  /// In-memory store, nothing persisted.
  explicit PeerStore(TorrentRegistry registry = {});
  ~PeerStore();
  PeerStore(const PeerStore&) = delete;
  PeerStore& operator=(const PeerStore&) = delete;

  /// Opens (creating if needed) a store directory. Torrents in `registry`
  /// that the store does not know yet are appended; ids must agree.
  static std::unique_ptr<PeerStore> open(const std::filesystem::path& dir, const TorrentRegistry* registry = nullptr);

  // ---- writes (single writer) ----

  /// Parses, validates and ingests one snapshot document. Byte-identical
  /// documents already ingested are skipped and counted in `deduped`.
  IngestStats ingest_snapshot(std::string_view xml, const geodb::GeoTable& geo);
  IngestStats ingest(const crawler::Snapshot& snapshot, const geodb::GeoTable& geo);

  /// Bulk load of already-resolved peers; merges with existing records.
  void import_peers(std::span<const PeerRecord> peers);
  /// Adds peers known only as a count per exact membership set, e.g. from a
  /// published table. They take part in counts and histograms but have no
  /// address, geolocation or sightings.
  void import_counts(const RegionHistogram& counts);
  /// Appends torrents not yet registered; returns the id for each input.
  std::vector<std::uint32_t> register_torrents(std::span<const TorrentInfo> torrents);
  /// Re-resolves geolocation of every peer against `geo` and checkpoints.
  std::size_t regeolocate(const geodb::GeoTable& geo);
  /// Writes a checkpoint covering the whole log (no-op in memory).
  void checkpoint();

  // ---- reads (any thread) ----

  TorrentRegistry registry() const;
  /// Peers with a record; see distinct_peers() for the total including counts.
  std::size_t peer_count() const;
  std::uint64_t distinct_peers() const;
  std::size_t snapshot_count() const;

  /// Throws StoreError(bad_selector) on an empty selector and
  /// StoreError(unknown_torrent_id) for unregistered ids.
  std::uint64_t distinct_count(std::span<const std::uint32_t> ids, SetMode mode) const;
  RegionHistogram histogram() const;

  /// Ascending IP order.
  void for_each_matching(const PeerFilter& filter, const std::function<void(const PeerRecord&)>& fn) const;
  std::vector<PeerRecord> peers_matching(const PeerFilter& filter) const;
  std::optional<PeerRecord> find(Ipv4 ip) const;

  std::vector<SnapshotRecord> snapshots() const;
  std::uint64_t total_hits() const;

  const std::optional<std::filesystem::path>& directory() const { return dir_; }

private:
  struct Mutation;

  IngestStats ingest_locked(const crawler::Snapshot& snapshot, const geodb::GeoTable& geo,
                            std::optional<Digest20> digest);
  void validate_selector(std::span<const std::uint32_t> ids) const;
  void apply(const Mutation& m, IngestStats* stats);
  void append_log(const Mutation& m);
  void replay(const std::filesystem::path& dir);
  void write_checkpoint_locked();

  mutable std::shared_mutex mu_;
  TorrentRegistry registry_;
  std::map<Ipv4, PeerRecord> peers_;
  std::vector<SnapshotRecord> snapshots_;
  std::set<Digest20> ingested_digests_;
  std::map<Membership, std::uint64_t> counted_;
  std::uint64_t total_hits_ = 0;

  std::optional<std::filesystem::path> dir_;
  std::ofstream log_;
  std::uint64_t seq_ = 0;
};

// ---- exports with the collection field names ----

/// peer: IP,country,state,city,ISP,longitude,latitude,t_1..t_N
void export_peers_csv(const PeerStore& store, std::ostream& out);
void export_peers_jsonl(const PeerStore& store, std::ostream& out);
/// crawl_files: time,network,peer_count,torrent_id,EuroCount,NACount,AUSCount
void export_crawl_files_csv(const PeerStore& store, std::ostream& out);
void export_crawl_files_jsonl(const PeerStore& store, std::ostream& out);

} // namespace swarmwatch
