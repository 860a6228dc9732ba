#pragma once

// Aggregates over a peer store: participation tables, Venn overlaps,
// geographic rankings, swarm-size time series with peak detection, activity
// and session-span estimates. All functions only read the store.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmwatch/geodb.hpp"
#include "swarmwatch/membership.hpp"
#include "swarmwatch/peerstore.hpp"
#include "swarmwatch/registry.hpp"
#include "swarmwatch/snapshot.hpp"
#include "swarmwatch/time.hpp"

namespace swarmwatch::analytics {

enum class Errc { empty_store, selector_arity, bad_scope, empty_window, series_too_short, bad_selector };

class AnalyticsError : public std::runtime_error {
public:
  AnalyticsError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

/// A percentage held as an integer count of hundredths, rounded half-up.
struct Percent {
  std::int64_t hundredths = 0;

  double value() const { return static_cast<double>(hundredths) / 100.0; }
  /// "26.17"
  std::string str() const;
  friend auto operator<=>(const Percent&, const Percent&) = default;
};

/// 100 * part / whole rounded half-up to two decimals; 0 when whole is 0.
Percent percent_of(std::uint64_t part, std::uint64_t whole);

// ---- participation ----

struct ParticipationRow {
  std::string label;
  std::vector<std::uint32_t> ids;
  std::uint64_t distinct_ips = 0;
  Percent overall;
};

struct ParticipationReport {
  std::uint64_t global_distinct = 0;
  std::vector<ParticipationRow> rows;
};

/// One row per torrent.
ParticipationReport swarm_table(const TorrentRegistry& registry, const RegionHistogram& peers);
ParticipationReport swarm_table(const PeerStore& store);
/// One row per episode label; the row counts the union of its torrents.
ParticipationReport episode_table(const TorrentRegistry& registry, const RegionHistogram& peers);
ParticipationReport episode_table(const PeerStore& store);

// ---- cross participation ----

struct Selector {
  std::string label;
  std::vector<std::uint32_t> ids;
};

struct VennRegion {
  /// Bit i set when the region lies inside selector i.
  unsigned mask = 0;
  std::string label;
  std::uint64_t count = 0;
  Percent share;
};

struct PairShare {
  std::size_t a = 0;
  std::size_t b = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_count = 0;
  /// |A n B| / |A u B|
  Percent of_union;
  /// |A n B| / |A|
  Percent of_first;
  /// |A n B| / |B|
  Percent of_second;
};

struct VennReport {
  std::vector<Selector> selectors;
  std::vector<std::uint64_t> set_sizes;
  std::uint64_t union_count = 0;
  /// Every region of the diagram, empty ones included, ordered by mask.
  std::vector<VennRegion> regions;
  std::vector<PairShare> pairs;
};

/// A peer belongs to a selector when it was seen in any of its torrents.
/// Throws SelectorArity unless 2 or 3 selectors are given.
VennReport cross_participation(std::span<const Selector> selectors, const RegionHistogram& peers);
VennReport cross_participation(std::span<const Selector> selectors, const PeerStore& store);

/// Resolves "1,2", "3" or a registry label such as "Breaking Bad S05E09".
Selector resolve_selector(const TorrentRegistry& registry, std::string_view text);

// ---- geography ----

enum class GeoLevel { country, state, city, isp };

std::string_view geo_level_name(GeoLevel level);
std::optional<GeoLevel> parse_geo_level(std::string_view text);

struct GeoRow {
  std::size_t rank = 0;
  /// Human form: "Athens, Greece", "California", "Comcast", "Greece".
  std::string label;
  std::string country;
  std::string value;
  std::uint64_t count = 0;
  Percent share;
  Percent cumulative;
};

struct GeoReport {
  GeoLevel level = GeoLevel::country;
  std::optional<std::string> scope;
  /// Peers in scope with a nonempty value at this level.
  std::uint64_t total = 0;
  std::vector<GeoRow> rows;
};

/// Distinct peers grouped by `level`, largest first, ties by label. Cities
/// group by (country, state, city). State level needs scope US or CA.
GeoReport geo_top(std::span<const PeerRecord> peers, GeoLevel level, std::size_t n,
                  const std::optional<std::string>& scope = std::nullopt);
GeoReport geo_top(const PeerStore& store, GeoLevel level, std::size_t n,
                  const std::optional<std::string>& scope = std::nullopt);

// ---- time series ----

inline constexpr Seconds default_bucket_width{120};

struct BucketCounts {
  std::uint64_t total = 0;
  std::uint64_t europe = 0;
  std::uint64_t north_america = 0;
  std::uint64_t australia = 0;

  friend bool operator==(const BucketCounts&, const BucketCounts&) = default;
};

enum class Series { total, europe, north_america, australia };

std::uint64_t series_value(const BucketCounts& c, Series s);
std::optional<Series> parse_series(std::string_view text);

struct SwarmTimeSeries {
  Instant start{};
  Seconds width = default_bucket_width;
  /// nullopt marks a bucket with no crawl record (a gap, not a zero).
  std::vector<std::optional<BucketCounts>> buckets;

  Instant bucket_start(std::size_t i) const { return start + width * static_cast<std::int64_t>(i); }
};

struct Window {
  Instant from{};
  /// Exclusive.
  Instant to{};
};

/// Bucket i covers [from + i*width, from + (i+1)*width). Within a bucket the
/// latest record of each torrent counts; torrents are summed. With
/// `torrent_id` set only that torrent contributes. Without a window the
/// series spans the first to the last matching record.
SwarmTimeSeries timeseries(std::span<const SnapshotRecord> records, std::optional<std::uint32_t> torrent_id,
                           std::optional<Window> window = std::nullopt, Seconds width = default_bucket_width);
SwarmTimeSeries timeseries(const PeerStore& store, std::optional<std::uint32_t> torrent_id,
                           std::optional<Window> window = std::nullopt, Seconds width = default_bucket_width);

// ---- peaks ----

/// Fixed representative UTC offsets used for local-time rendering.
std::chrono::minutes region_utc_offset(geodb::Region region);

struct PeakOptions {
  /// Centered moving-average width in buckets; even widths are widened by one.
  std::size_t smoothing = 1;
  /// Minimum prominence as a fraction of the smoothed series range.
  double min_prominence = 0.10;
  Series series = Series::total;
  /// Renders peak times in this region's local time when set.
  std::optional<geodb::Region> lens;
};

struct Peak {
  std::size_t bucket = 0;
  Instant time{};
  double magnitude = 0.0;
  double prominence = 0.0;
  /// "20:30", present when a lens is given.
  std::optional<std::string> local_time;
};

/// Centered moving average that skips gaps; a bucket whose whole window is
/// gaps stays a gap.
std::vector<std::optional<double>> smooth(std::span<const std::optional<double>> values, std::size_t width);

/// Plateau-aware local maxima of the smoothed series whose topographic
/// prominence reaches the threshold. Throws SeriesTooShort when the series
/// is not longer than the smoothing window.
std::vector<Peak> detect_peaks(const SwarmTimeSeries& series, const PeakOptions& options = {});
std::vector<Peak> detect_peaks(std::span<const std::optional<double>> values, Instant start, Seconds width,
                               const PeakOptions& options = {});

// ---- activity ----

struct ActivityStats {
  std::uint64_t total_hits = 0;
  std::uint64_t distinct_ips = 0;
  double avg_hits_per_ip = 0.0;
  /// avg_hits_per_ip * cycle interval.
  std::chrono::duration<double> est_avg_activity{0.0};
};

ActivityStats activity_stats(std::uint64_t total_hits, std::uint64_t distinct_ips,
                             Seconds cycle_interval = default_bucket_width);
ActivityStats activity_stats(const PeerStore& store, Seconds cycle_interval = default_bucket_width);

// ---- sessions ----

struct SessionSpan {
  Ipv4 ip;
  /// 0 in store mode, where the span runs across all torrents.
  std::uint32_t torrent_id = 0;
  Instant first_seen{};
  Instant last_seen{};
  Seconds span{0};
  std::uint64_t sightings = 0;
};

enum class SessionMode { store, snapshots };

std::string_view session_mode_name(SessionMode mode);

/// Cross-torrent spans from the store's first/last sightings.
std::vector<SessionSpan> session_durations(const PeerStore& store);
/// Per (ip, torrent) spans from raw snapshots; bogons are skipped.
std::vector<SessionSpan> session_durations(std::span<const crawler::Snapshot> snapshots);

// ---- rendering ----

void write_csv(std::ostream& out, const ParticipationReport& r);
void write_jsonl(std::ostream& out, const ParticipationReport& r);
void write_csv(std::ostream& out, const VennReport& r);
void write_jsonl(std::ostream& out, const VennReport& r);
void write_csv(std::ostream& out, const GeoReport& r);
void write_jsonl(std::ostream& out, const GeoReport& r);
/// bucket_start,total,europe,north_america,australia; gaps leave the counts empty.
void write_csv(std::ostream& out, const SwarmTimeSeries& s);
void write_jsonl(std::ostream& out, const SwarmTimeSeries& s);
void write_csv(std::ostream& out, std::span<const Peak> peaks);
void write_jsonl(std::ostream& out, std::span<const Peak> peaks);
void write_csv(std::ostream& out, const ActivityStats& a);
void write_jsonl(std::ostream& out, const ActivityStats& a);
void write_csv(std::ostream& out, std::span<const SessionSpan> spans, SessionMode mode);
void write_jsonl(std::ostream& out, std::span<const SessionSpan> spans, SessionMode mode);

} // namespace swarmwatch::analytics
