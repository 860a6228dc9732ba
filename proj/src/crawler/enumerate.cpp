#include <algorithm>
#include <future>
#include <unordered_set>

#include <fmt/format.h>

#include "swarmwatch/crawler.hpp"

namespace swarmwatch::crawler {

std::string_view stop_rule_name(StopRule r) {
  switch (r) {
  case StopRule::saturated: return "saturated";
  case StopRule::round_budget: return "round_budget";
  case StopRule::all_trackers_unreachable: break;
  }
  return "all_trackers_unreachable";
}

Enumerator::Enumerator(const tracker::TrackerClient& client, Clock& clock, EnumerationOptions options, PeerId peer_id)
    : client_(client), clock_(clock), options_(options), peer_id_(peer_id) {
  options_.saturation_rounds = std::max(options_.saturation_rounds, 1);
  options_.round_budget = std::max(options_.round_budget, 1);
  options_.numwant = std::max<std::int32_t>(options_.numwant, 0);
}

namespace {

struct Outcome {
  std::size_t tracker;
  std::optional<tracker::AnnounceResponse> response;
  std::string error;
};

Outcome announce_one(const tracker::TrackerClient& client, const std::string& url, std::size_t index,
                     const tracker::AnnounceRequest& req) {
  try {
    return {index, client.announce(url, req), {}};
  } catch (const std::exception& e) {
    return {index, std::nullopt, fmt::format("{}: {}", url, e.what())};
  }
}

} // namespace

CrawlCycleResult Enumerator::enumerate(const CrawlJob& job) const {
  CrawlCycleResult result;
  result.torrent_id = job.torrent_id;
  result.infohash = job.torrent.infohash;
  result.started_at = clock_.now();

  tracker::AnnounceRequest req;
  req.infohash = job.torrent.infohash;
  req.peer_id = peer_id_;
  req.port = options_.listen_port;
  // Always a leecher: never `completed`, never left == 0.
  req.left = std::max<std::uint64_t>(job.torrent.total_size, 1);
  req.numwant = options_.numwant;

  const std::size_t ntrackers = job.trackers.size();
  std::unordered_set<Ipv4> ips;
  std::vector<bool> tracker_failed(ntrackers, false);
  bool any_success = false;
  int quiet_streak = 0;
  std::size_t next_tracker = 0;

  if (ntrackers == 0) {
    result.stop = StopRule::all_trackers_unreachable;
    result.errors.push_back("no trackers configured");
    result.ended_at = clock_.now();
    return result;
  }

  for (int round = 1; round <= options_.round_budget; ++round) {
    req.event = round == 1 ? tracker::Event::started : tracker::Event::none;
    std::vector<Outcome> outcomes;
    if (options_.concurrent_trackers && ntrackers > 1) {
      std::vector<std::future<Outcome>> pending;
      for (std::size_t i = 0; i < ntrackers; ++i)
        pending.push_back(std::async(std::launch::async, announce_one, std::cref(client_), std::cref(job.trackers[i]), i, req));
      for (auto& f : pending) outcomes.push_back(f.get());
    } else {
      const std::size_t i = next_tracker++ % ntrackers;
      outcomes.push_back(announce_one(client_, job.trackers[i], i, req));
    }

    std::size_t new_ips = 0;
    for (auto& o : outcomes) {
      if (!o.response) {
        tracker_failed[o.tracker] = true;
        result.errors.push_back(std::move(o.error));
        continue;
      }
      any_success = true;
      result.seeders = o.response->seeders;
      result.leechers = o.response->leechers;
      for (const auto& peer : o.response->peers) {
        result.peers.insert(peer);
        if (ips.insert(peer.ip).second) ++new_ips;
      }
    }
    result.announce_rounds = round;

    if (!any_success && std::all_of(tracker_failed.begin(), tracker_failed.end(), [](bool f) { return f; })) {
      result.stop = StopRule::all_trackers_unreachable;
      break;
    }
    if (round > 1) {
      quiet_streak = new_ips == 0 ? quiet_streak + 1 : 0;
      if (quiet_streak >= options_.saturation_rounds) {
        result.stop = StopRule::saturated;
        break;
      }
    }
    if (round == options_.round_budget) result.stop = StopRule::round_budget;
  }
  result.ended_at = clock_.now();
  return result;
}

} // namespace swarmwatch::crawler
