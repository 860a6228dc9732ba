#include "swarmwatch/sim.hpp"

#include <unordered_map>

#include <fmt/format.h>

namespace swarmwatch::sim {

Score score(const GroundTruth& truth, const PeerStore& observed, const ScoreOptions& options) {
  const Instant from = options.from.value_or(truth.start());
  const Instant to = options.to.value_or(truth.end());
  if (from >= to || from < truth.start() || to > truth.end())
    throw SimError(Errc::window_mismatch, fmt::format("score: window {} .. {} is outside the simulated span {} .. {}",
                                                      format_iso8601(from), format_iso8601(to),
                                                      format_iso8601(truth.start()), format_iso8601(truth.end())));
  for (const auto& s : observed.snapshots())
    if (s.time < truth.start() || s.time >= truth.end())
      throw SimError(Errc::window_mismatch,
                     fmt::format("score: crawl record at {} lies outside the simulated span", format_iso8601(s.time)));

  const Seconds threshold = std::max(options.min_online, Seconds{1});
  const auto peers = truth.peers();
  std::unordered_map<std::uint32_t, std::uint32_t> by_ip;
  for (std::uint32_t i = 0; i < peers.size(); ++i) by_ip.emplace(peers[i].endpoint.ip.value(), i);

  // Store torrent id -> truth swarm id.
  const auto registry = observed.registry();
  std::vector<std::uint32_t> swarm_of(registry.size() + 1, 0);
  for (const auto& t : registry.torrents()) swarm_of[t.id] = truth.swarm_id(t.infohash);

  Score sc;
  std::vector<bool> peer_active(peers.size(), false);
  for (std::uint32_t i = 0; i < peers.size(); ++i) {
    if (peers[i].online_within(from, to) < threshold) continue;
    peer_active[i] = true;
    sc.active += peers[i].swarms.count();
    ++sc.regions[geodb::classify_region(peers[i].country)].truth;
  }

  std::uint64_t plausible = 0;
  double span_error = 0.0;
  std::uint64_t span_n = 0;
  observed.for_each_matching({}, [&](const PeerRecord& rec) {
    const auto it = by_ip.find(rec.ip.value());
    const SimPeer* peer = it == by_ip.end() ? nullptr : &peers[it->second];
    const bool online_somewhere = peer != nullptr && peer->online_within(from, to) > Seconds{0};
    bool matched_any = false;
    for (auto id : rec.membership.ids()) {
      ++sc.observed;
      const auto swarm = id < swarm_of.size() ? swarm_of[id] : 0;
      if (peer == nullptr || swarm == 0 || !peer->swarms.test(swarm)) continue;
      if (online_somewhere) ++plausible;
      if (peer_active[it->second]) {
        ++sc.matched;
        matched_any = true;
      }
    }
    if (peer != nullptr && peer_active[it->second])
      ++sc.regions[geodb::classify_region(rec.country)].observed;
    if (matched_any) {
      Instant first = to;
      Instant last = from;
      for (const auto& iv : peer->online) {
        if (iv.to <= from || iv.from >= to) continue;
        first = std::min(first, std::max(iv.from, from));
        last = std::max(last, std::min(iv.to, to));
      }
      const auto truth_span = static_cast<double>((last - first).count());
      const auto seen_span = static_cast<double>((rec.last_seen - rec.first_seen).count());
      span_error += std::abs(truth_span - seen_span);
      ++span_n;
    }
  });

  sc.recall = sc.active == 0 ? 0.0 : static_cast<double>(sc.matched) / static_cast<double>(sc.active);
  sc.precision = sc.observed == 0 ? 1.0 : static_cast<double>(plausible) / static_cast<double>(sc.observed);
  sc.span_mae_s = span_n == 0 ? 0.0 : span_error / static_cast<double>(span_n);
  for (auto& [region, r] : sc.regions) {
    if (r.truth == 0) continue;
    const auto diff = r.observed > r.truth ? r.observed - r.truth : r.truth - r.observed;
    r.relative_error = static_cast<double>(diff) / static_cast<double>(r.truth);
  }
  return sc;
}

} // namespace swarmwatch::sim
