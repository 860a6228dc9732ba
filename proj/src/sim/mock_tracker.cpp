#include "swarmwatch/sim.hpp"

#include <fmt/format.h>

namespace swarmwatch::sim {

MockTracker::MockTracker(const GroundTruth& truth, Clock& clock, MockTrackerOptions options)
    : truth_(truth), clock_(clock), options_(std::move(options)), rng_(options_.seed) {}

const std::vector<std::uint32_t>& MockTracker::online_cached(std::uint32_t swarm, Instant t) {
  auto& slot = cache_[swarm];
  if (slot.second.empty() || slot.first != t) {
    slot.first = t;
    slot.second = truth_.online_in(swarm, t);
  }
  return slot.second;
}

tracker::AnnounceResponse MockTracker::answer(const tracker::AnnounceRequest& req) {
  ++announces_;
  const auto swarm = truth_.swarm_id(req.infohash);
  if (swarm == 0) throw tracker::TrackerError(tracker::Errc::tracker_failure, options_.failure_message);
  const Instant now = clock_.now();

  std::lock_guard lock(mu_);
  const auto& online = online_cached(swarm, now);
  tracker::AnnounceResponse resp;
  resp.interval = std::chrono::seconds{options_.interval};
  for (auto i : online) {
    if (truth_.peers()[i].seeder) ++resp.seeders;
    else ++resp.leechers;
  }
  const std::size_t want = req.numwant < 0 ? options_.max_peers : static_cast<std::size_t>(req.numwant);
  const std::size_t k = std::min({want, options_.max_peers, online.size()});
  // Partial Fisher-Yates over a copy: a uniform k-subset.
  std::vector<std::uint32_t> pick(online.begin(), online.end());
  for (std::size_t a = 0; a < k; ++a) {
    std::uniform_int_distribution<std::size_t> d(a, pick.size() - 1);
    std::swap(pick[a], pick[d(rng_)]);
  }
  resp.peers.reserve(k);
  for (std::size_t a = 0; a < k; ++a) resp.peers.push_back(truth_.peers()[pick[a]].endpoint);
  return resp;
}

std::string MockTracker::handle_http(std::string_view target) {
  const auto q = target.find('?');
  const auto path = target.substr(0, q);
  const auto query = q == std::string_view::npos ? std::string_view{} : target.substr(q + 1);
  try {
    if (path.ends_with("/announce")) {
      if (options_.fault == Fault::failure_reason) {
        ++announces_;
        return tracker::encode_failure_body(options_.failure_message);
      }
      return tracker::encode_announce_body(answer(tracker::parse_announce_query(query)));
    }
    if (path.ends_with("/scrape")) {
      const Instant now = clock_.now();
      tracker::ScrapeResult result;
      for (const auto& hash : tracker::parse_scrape_query(query)) {
        const auto swarm = truth_.swarm_id(hash);
        if (swarm == 0) continue;
        tracker::ScrapeCounters c;
        for (auto i : truth_.online_in(swarm, now)) {
          if (truth_.peers()[i].seeder) ++c.seeders;
          else ++c.leechers;
        }
        for (auto i : truth_.swarms()[swarm - 1].members)
          if (truth_.peers()[i].seeder) ++c.completed;
        result.emplace(hash, c);
      }
      return tracker::encode_scrape_body(result);
    }
    return tracker::encode_failure_body("unknown path");
  } catch (const tracker::TrackerError& e) {
    return tracker::encode_failure_body(e.what());
  }
}

std::optional<std::string> MockTracker::handle_udp(std::string_view datagram) {
  namespace udp = tracker::udp;
  if (options_.fault == Fault::drop_udp) return std::nullopt;
  const auto header = udp::parse_request_header(datagram);
  if (!header) return std::nullopt;
  const std::uint32_t txid =
      options_.fault == Fault::wrong_transaction_id ? header->transaction_id + 1 : header->transaction_id;

  if (header->action == udp::Action::connect) {
    if (header->connection_id != udp::protocol_id) return std::nullopt;
    std::lock_guard lock(mu_);
    const std::uint64_t id = rng_();
    connection_ids_.insert(id);
    return udp::encode_connect_response(txid, id);
  }
  if (header->action != udp::Action::announce) return udp::encode_error(txid, "unsupported action");
  {
    std::lock_guard lock(mu_);
    if (!connection_ids_.contains(header->connection_id)) return udp::encode_error(txid, "unknown connection id");
  }
  const auto req = udp::parse_announce_request(datagram);
  if (!req) return udp::encode_error(txid, "malformed announce");
  if (options_.fault == Fault::failure_reason) {
    ++announces_;
    return udp::encode_error(txid, options_.failure_message);
  }
  try {
    return udp::encode_announce_response(txid, answer(*req));
  } catch (const tracker::TrackerError& e) {
    return udp::encode_error(txid, e.what());
  }
}

std::string LoopbackTransport::get(const std::string& url) {
  // Keep everything after the authority: "/announce?...".
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) throw tracker::TrackerError(tracker::Errc::transport_error, "loopback: no path");
  return tracker_.handle_http(std::string_view(url).substr(slash));
}

std::optional<std::string> LoopbackTransport::exchange(const std::string&, std::uint16_t, std::string_view payload,
                                                       std::chrono::milliseconds) {
  return tracker_.handle_udp(payload);
}

} // namespace swarmwatch::sim
