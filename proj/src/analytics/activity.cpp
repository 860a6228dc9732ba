#include "swarmwatch/analytics.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace swarmwatch::analytics {

ActivityStats activity_stats(std::uint64_t total_hits, std::uint64_t distinct_ips, Seconds cycle_interval) {
  if (distinct_ips == 0) throw AnalyticsError(Errc::empty_store, "analytics: the store holds no peers");
  ActivityStats a;
  a.total_hits = total_hits;
  a.distinct_ips = distinct_ips;
  a.avg_hits_per_ip = static_cast<double>(total_hits) / static_cast<double>(distinct_ips);
  a.est_avg_activity = std::chrono::duration<double>(a.avg_hits_per_ip * static_cast<double>(cycle_interval.count()));
  return a;
}

ActivityStats activity_stats(const PeerStore& store, Seconds cycle_interval) {
  return activity_stats(store.total_hits(), store.distinct_peers(), cycle_interval);
}

std::string_view session_mode_name(SessionMode mode) {
  return mode == SessionMode::store ? "store" : "snapshots";
}

std::vector<SessionSpan> session_durations(const PeerStore& store) {
  std::vector<SessionSpan> out;
  store.for_each_matching({}, [&](const PeerRecord& p) {
    out.push_back({p.ip, 0, p.first_seen, p.last_seen, p.last_seen - p.first_seen, p.hit_count});
  });
  return out;
}

std::vector<SessionSpan> session_durations(std::span<const crawler::Snapshot> snapshots) {
  std::map<std::pair<Ipv4, std::uint32_t>, SessionSpan> spans;
  for (const auto& s : snapshots) {
    // An IP listed on several ports in one snapshot is one sighting.
    std::vector<Ipv4> ips;
    for (const auto& p : s.peers)
      if (!p.bogon && !p.endpoint.ip.is_bogon()) ips.push_back(p.endpoint.ip);
    std::sort(ips.begin(), ips.end());
    ips.erase(std::unique(ips.begin(), ips.end()), ips.end());
    for (auto ip : ips) {
      auto [it, inserted] = spans.try_emplace({ip, s.torrent_id});
      auto& span = it->second;
      if (inserted) {
        span.ip = ip;
        span.torrent_id = s.torrent_id;
        span.first_seen = s.time;
        span.last_seen = s.time;
      }
      span.first_seen = std::min(span.first_seen, s.time);
      span.last_seen = std::max(span.last_seen, s.time);
      ++span.sightings;
    }
  }
  std::vector<SessionSpan> out;
  out.reserve(spans.size());
  for (auto& [key, span] : spans) {
    span.span = span.last_seen - span.first_seen;
    out.push_back(span);
  }
  return out;
}

} // namespace swarmwatch::analytics
