#pragma once

// Synthetic swarms with known ground truth, a mock tracker that serves them
// over the real HTTP and UDP wire formats, and scoring of crawl results
// against the truth.
//
// Population specs are key = value text, '#' starts a comment:
//
//   seed = 7
//   start = 2013-08-12T00:00:00Z
//   days = 2
//   swarm_sizes = 500, 300          # target distinct peers per swarm
//   mix.europe = 0.4                # region shares, must sum to 1
//   mix.north_america = 0.3
//   mix.australia = 0.2
//   mix.other = 0.1
//   offset.europe = 1               # UTC offset (hours) of each region's clock
//   diurnal.floor = 0.1             # online probability at night
//   diurnal.amplitude = 0.8         # extra probability at the daily peak
//   diurnal.peak_hour = 20.5        # local hour of the peak
//   diurnal.sharpness = 1           # exponent on the half-sine lobe
//   churn_rate = 0.3                # share of peers with one short session
//   session.mean_minutes = 30
//   session.min_minutes = 0
//   seeder_share = 0.2
//   unresolvable_share = 0
//   overlap.1.2 = 0.05              # share of swarm 1's own peers also in swarm 2
//
// Without a diurnal section every non-churning peer is online throughout.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "swarmwatch/clock.hpp"
#include "swarmwatch/crawler.hpp"
#include "swarmwatch/geodb.hpp"
#include "swarmwatch/membership.hpp"
#include "swarmwatch/peerstore.hpp"
#include "swarmwatch/tracker_client.hpp"

namespace swarmwatch::sim {

enum class Errc { bad_spec, infeasible_spec, geo_exhausted, window_mismatch };

class SimError : public std::runtime_error {
public:
  SimError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

/// Regions in generator order; `other` is everything outside the three.
inline constexpr std::array<geodb::Region, 4> sim_regions{geodb::Region::europe, geodb::Region::north_america,
                                                          geodb::Region::australia, geodb::Region::other};

/// p(h) = floor + amplitude * max(0, sin(pi * (h - peak_hour + 6) / 12))^sharpness
/// for local hour h. Sharpness 1 is the plain half-sine lobe.
struct DiurnalModel {
  double floor = 1.0;
  double amplitude = 0.0;
  double peak_hour = 20.5;
  double sharpness = 1.0;

  double probability(double local_hour) const;
  /// Half-width in hours of the daily online interval of a peer whose
  /// activity threshold is u: online iff u < p(h). Negative means never
  /// online; 12 or more means always online.
  double half_width_hours(double u) const;
};

struct PopulationSpec {
  std::uint64_t seed = 1;
  Instant start = make_instant(2013, 8, 12, 0, 0, 0);
  Seconds duration{86400};
  std::vector<std::uint64_t> swarm_sizes;
  /// Indexed like sim_regions.
  std::array<double, 4> mix{1.0, 0.0, 0.0, 0.0};
  std::array<double, 4> utc_offset_hours{1.0, -5.0, 10.0, 0.0};
  DiurnalModel diurnal;
  double churn_rate = 0.0;
  Seconds mean_session{1800};
  Seconds min_session{0};
  double seeder_share = 0.2;
  double unresolvable_share = 0.0;
  /// overlap[i][j]: share of peers whose home swarm is i that also join j.
  std::vector<std::vector<double>> overlap;

  /// Throws SimError(bad_spec).
  void validate() const;
  Instant end() const { return start + duration; }

  static PopulationSpec parse(std::string_view text);
  static PopulationSpec load(const std::filesystem::path& path);
  std::string to_config() const;
};

struct Interval {
  Instant from{};
  /// Exclusive.
  Instant to{};

  bool contains(Instant t) const { return from <= t && t < to; }
  Seconds length() const { return to - from; }
};

struct SimPeer {
  Endpoint endpoint;
  geodb::Region region = geodb::Region::other;
  /// Empty for peers deliberately given unresolvable addresses.
  std::string country;
  /// Swarm ids, 1-based.
  Membership swarms;
  std::uint32_t home = 0;
  bool churner = false;
  bool seeder = false;
  /// Sorted, non-overlapping, clipped to the population window.
  std::vector<Interval> online;

  bool online_at(Instant t) const;
  Seconds online_within(Instant from, Instant to) const;
};

struct SimSwarm {
  std::uint32_t id = 0;
  Infohash infohash;
  std::string name;
  std::vector<std::uint32_t> members;
};

class GroundTruth {
public:
  const PopulationSpec& spec() const { return spec_; }
  Instant start() const { return spec_.start; }
  Instant end() const { return spec_.end(); }
  std::span<const SimPeer> peers() const { return peers_; }
  std::span<const SimSwarm> swarms() const { return swarms_; }

  /// Swarm id for an infohash, 0 if unknown.
  std::uint32_t swarm_id(const Infohash& hash) const;
  /// Indices into peers() of members of `swarm` online at t, ascending.
  std::vector<std::uint32_t> online_in(std::uint32_t swarm, Instant t) const;
  /// Closed-form expectation of the online share of a region at t.
  double expected_online_share(geodb::Region region, Instant t) const;

  TorrentRegistry registry() const;
  std::vector<crawler::CrawlJob> jobs(const std::string& tracker_url, Seconds interval) const;

  /// One row per peer: ip,port,region,country,home,swarms,churner,seeder,intervals
  std::string to_csv() const;

  friend GroundTruth generate(const PopulationSpec& spec, const geodb::GeoTable& geo);

private:
  PopulationSpec spec_;
  std::vector<SimPeer> peers_;
  std::vector<SimSwarm> swarms_;
  std::unordered_map<Infohash, std::uint32_t> by_hash_;
};

/// Deterministic under spec.seed. Peer addresses come from the ranges of
/// `geo` whose country falls in the peer's region. Throws
/// SimError(infeasible_spec) when the overlap matrix cannot be met with
/// nonnegative home-swarm sizes.
GroundTruth generate(const PopulationSpec& spec, const geodb::GeoTable& geo);

// ---- mock tracker ----

enum class Fault { none, failure_reason, drop_udp, wrong_transaction_id };

struct MockTrackerOptions {
  std::uint64_t seed = 1;
  /// Largest peer list in one reply, on top of the client's numwant.
  std::size_t max_peers = 200;
  std::int32_t interval = 1800;
  Fault fault = Fault::none;
  std::string failure_message = "torrent not registered";
};

/// Answers announces from a ground truth at the clock's current time. Each
/// reply is a uniform random sample of min(numwant, max_peers, online)
/// online members.
class MockTracker {
public:
  MockTracker(const GroundTruth& truth, Clock& clock, MockTrackerOptions options = {});

  tracker::AnnounceResponse answer(const tracker::AnnounceRequest& req);
  /// `target` is the request path with query, e.g. "/announce?info_hash=...".
  /// Returns the HTTP body; unknown paths answer with a failure body.
  std::string handle_http(std::string_view target);
  /// nullopt when the datagram is ignored or dropped.
  std::optional<std::string> handle_udp(std::string_view datagram);

  std::uint64_t announces() const { return announces_; }

private:
  const std::vector<std::uint32_t>& online_cached(std::uint32_t swarm, Instant t);

  const GroundTruth& truth_;
  Clock& clock_;
  MockTrackerOptions options_;
  std::mutex mu_;
  std::mt19937_64 rng_;
  std::set<std::uint64_t> connection_ids_;
  std::map<std::uint32_t, std::pair<Instant, std::vector<std::uint32_t>>> cache_;
  std::atomic<std::uint64_t> announces_{0};
};

/// Routes tracker traffic straight into a MockTracker, still through the
/// full wire encoding. URLs are matched on path only.
class LoopbackTransport final : public tracker::HttpTransport, public tracker::DatagramTransport {
public:
  explicit LoopbackTransport(MockTracker& tracker) : tracker_(tracker) {}

  std::string get(const std::string& url) override;
  std::optional<std::string> exchange(const std::string& host, std::uint16_t port, std::string_view payload,
                                      std::chrono::milliseconds timeout) override;

private:
  MockTracker& tracker_;
};

/// Serves a MockTracker on 127.0.0.1 over HTTP and UDP, ports picked by the OS.
class MockTrackerServer {
public:
  explicit MockTrackerServer(MockTracker& tracker);
  ~MockTrackerServer();
  MockTrackerServer(const MockTrackerServer&) = delete;
  MockTrackerServer& operator=(const MockTrackerServer&) = delete;

  std::string http_announce_url() const;
  std::string udp_announce_url() const;
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---- crawling a truth ----

struct CrawlSimOptions {
  Seconds interval{120};
  crawler::EnumerationOptions enumeration;
  MockTrackerOptions tracker;
};

struct CrawlSimResult {
  std::unique_ptr<PeerStore> store;
  crawler::ScheduleStats schedule;
  std::uint64_t announces = 0;
};

/// Crawls every swarm of `truth` from start to end on a virtual clock
/// through a loopback mock tracker and ingests every cycle into an
/// in-memory store.
CrawlSimResult crawl_truth(const GroundTruth& truth, const geodb::GeoTable& geo, const CrawlSimOptions& options);

// ---- scoring ----

struct ScoreOptions {
  /// Defaults to the truth's full window.
  std::optional<Instant> from;
  std::optional<Instant> to;
  /// A (peer, swarm) pair counts as active when online at least this long
  /// inside the window.
  Seconds min_online{0};
};

struct RegionScore {
  std::uint64_t truth = 0;
  std::uint64_t observed = 0;
  /// |observed - truth| / truth; 0 when truth is 0.
  double relative_error = 0.0;
};

struct Score {
  std::uint64_t active = 0;
  std::uint64_t observed = 0;
  std::uint64_t matched = 0;
  /// matched / active over (peer, swarm) pairs; 0 when nothing was active.
  double recall = 0.0;
  /// Observed pairs that were online in the window / observed; 1 when empty.
  double precision = 1.0;
  std::map<geodb::Region, RegionScore> regions;
  /// Mean |observed span - true span| over matched peers, seconds.
  double span_mae_s = 0.0;
};

/// Throws SimError(window_mismatch) when the window or the store's crawl
/// records fall outside the truth's span.
Score score(const GroundTruth& truth, const PeerStore& observed, const ScoreOptions& options = {});

} // namespace swarmwatch::sim
