#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "swarmwatch/clock.hpp"
#include "swarmwatch/torrent.hpp"
#include "swarmwatch/tracker_client.hpp"

namespace swarmwatch::crawler {

inline constexpr Seconds default_cycle_interval{120};

struct CrawlJob {
  TorrentMeta torrent;
  /// Stable small id, 1..N, unique within a run.
  std::uint32_t torrent_id = 0;
  std::vector<std::string> trackers;
  Seconds cycle_interval = default_cycle_interval;
};

struct EnumerationOptions {
  /// Stop after this many consecutive rounds (after the first) add no new IP.
  int saturation_rounds = 3;
  int round_budget = 50;
  std::int32_t numwant = tracker::default_numwant;
  std::uint16_t listen_port = 6881;
  /// Announce to every tracker in each round instead of rotating one per round.
  bool concurrent_trackers = false;
};

enum class StopRule { saturated, round_budget, all_trackers_unreachable };

std::string_view stop_rule_name(StopRule r);

struct CrawlCycleResult {
  std::uint32_t torrent_id = 0;
  Infohash infohash;
  Instant started_at{};
  Instant ended_at{};
  std::set<Endpoint> peers;
  int announce_rounds = 0;
  std::uint32_t seeders = 0;
  std::uint32_t leechers = 0;
  StopRule stop = StopRule::saturated;
  /// One message per failed announce.
  std::vector<std::string> errors;

  bool failed() const { return stop == StopRule::all_trackers_unreachable; }
};

/// Runs announce rounds against a job's trackers until the swarm saturates.
class Enumerator {
public:
  Enumerator(const tracker::TrackerClient& client, Clock& clock, EnumerationOptions options, PeerId peer_id);

  CrawlCycleResult enumerate(const CrawlJob& job) const;

  const EnumerationOptions& options() const { return options_; }

private:
  const tracker::TrackerClient& client_;
  Clock& clock_;
  EnumerationOptions options_;
  PeerId peer_id_;
};

struct ScheduleOptions {
  /// Enumerate the jobs of one cycle concurrently. Off by default: jobs are
  /// crawled one after another.
  bool parallel_jobs = false;
};

struct ScheduleStats {
  std::size_t cycles = 0;
  std::size_t results = 0;
  std::size_t overruns = 0;
};

/// Crawls every job once per cycle, hands each result to `emit` before the
/// next cycle starts, then sleeps until the cycle interval (the largest of
/// the jobs' intervals) has elapsed since the cycle began. A cycle only
/// starts before `stop_at`; if `stop_at` passes mid-cycle the remaining jobs
/// of that cycle are skipped and finished results are still emitted.
ScheduleStats run_schedule(std::span<const CrawlJob> jobs, Instant stop_at, const Enumerator& enumerator,
                           Clock& clock, const std::function<void(const CrawlCycleResult&)>& emit,
                           ScheduleOptions options = {});

} // namespace swarmwatch::crawler
