#include "swarmwatch/tracker_client.hpp"

#include <charconv>
#include <random>

#include <fmt/format.h>

namespace swarmwatch::tracker {

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

std::uint32_t next_transaction_id() {
  thread_local std::mt19937 rng{std::random_device{}()};
  return static_cast<std::uint32_t>(rng());
}

} // namespace

std::optional<UdpTarget> parse_udp_url(std::string_view url) {
  if (!starts_with_ci(url, "udp://")) return std::nullopt;
  url.remove_prefix(6);
  url = url.substr(0, url.find_first_of("/?"));
  const auto colon = url.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::uint16_t port = 0;
  const std::string_view port_text = url.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port == 0) return std::nullopt;
  return UdpTarget{std::string{url.substr(0, colon)}, port};
}

TrackerClient::TrackerClient(std::shared_ptr<HttpTransport> http, std::shared_ptr<DatagramTransport> udp,
                             ClientOptions options)
    : http_(std::move(http)), udp_(std::move(udp)), options_(std::move(options)) {}

AnnounceResponse TrackerClient::announce(const std::string& url, const AnnounceRequest& req) const {
  if (starts_with_ci(url, "http://") || starts_with_ci(url, "https://")) return http_announce(url, req);
  if (auto target = parse_udp_url(url)) return udp_announce(*target, req);
  throw TrackerError(Errc::bad_url, fmt::format("tracker: unsupported announce URL '{}'", url));
}

AnnounceResponse TrackerClient::http_announce(const std::string& url, const AnnounceRequest& req) const {
  if (!starts_with_ci(url, "http://") && !starts_with_ci(url, "https://"))
    throw TrackerError(Errc::bad_url, fmt::format("tracker: '{}' is not an HTTP(S) URL", url));
  if (!http_) throw TrackerError(Errc::transport_error, "tracker: no HTTP transport configured");
  return parse_announce_body(http_->get(http_announce_url(url, req)));
}

AnnounceResponse TrackerClient::udp_announce(const UdpTarget& target, const AnnounceRequest& req) const {
  if (!udp_) throw TrackerError(Errc::transport_error, "tracker: no UDP transport configured");

  // Reads one reply for `txid`, surfacing tracker errors; nullopt on timeout.
  const auto await_reply = [&](std::string_view request, std::uint32_t txid,
                               std::chrono::milliseconds timeout) -> std::optional<std::pair<udp::Action, std::string>> {
    auto datagram = udp_->exchange(target.host, target.port, request, timeout);
    if (!datagram) return std::nullopt;
    const udp::Reply reply = udp::parse_reply(*datagram);
    if (reply.transaction_id != txid)
      throw TrackerError(Errc::transaction_id_mismatch,
                         fmt::format("tracker: transaction id {:#x} != {:#x}", reply.transaction_id, txid));
    if (reply.action == udp::Action::error) throw TrackerError(Errc::tracker_error, std::string{reply.payload});
    return std::pair{reply.action, std::string{reply.payload}};
  };

  for (const auto timeout : options_.udp_timeouts) {
    const std::uint32_t connect_txid = next_transaction_id();
    auto connected = await_reply(udp::encode_connect_request(connect_txid), connect_txid, timeout);
    if (!connected) continue;
    if (connected->first != udp::Action::connect)
      throw TrackerError(Errc::malformed_response, "tracker: expected a connect reply");
    const std::uint64_t connection_id = udp::parse_connect_payload(connected->second);

    const std::uint32_t announce_txid = next_transaction_id();
    auto announced = await_reply(udp::encode_announce_request(connection_id, announce_txid, req), announce_txid, timeout);
    if (!announced) continue;
    if (announced->first != udp::Action::announce)
      throw TrackerError(Errc::malformed_response, "tracker: expected an announce reply");
    return udp::parse_announce_payload(announced->second);
  }
  throw TrackerError(Errc::timeout, fmt::format("tracker: udp://{}:{} did not answer after {} attempts", target.host,
                                                target.port, options_.udp_timeouts.size()));
}

ScrapeResult TrackerClient::scrape(const std::string& url, std::span<const Infohash> hashes) const {
  if (hashes.empty() || hashes.size() > max_scrape_hashes)
    throw TrackerError(Errc::bad_request, fmt::format("tracker: scrape takes 1..{} infohashes, got {}",
                                                      max_scrape_hashes, hashes.size()));
  if (!starts_with_ci(url, "http://") && !starts_with_ci(url, "https://"))
    throw TrackerError(Errc::bad_url, fmt::format("tracker: scrape needs an HTTP(S) URL, got '{}'", url));
  if (!http_) throw TrackerError(Errc::transport_error, "tracker: no HTTP transport configured");
  std::string base = url;
  if (url.find("/scrape") == std::string::npos) {
    auto derived = scrape_url_from_announce(url);
    if (!derived) throw TrackerError(Errc::bad_url, fmt::format("tracker: cannot derive scrape URL from '{}'", url));
    base = *derived;
  }
  ScrapeResult all = parse_scrape_body(http_->get(http_scrape_url(base, hashes)));
  ScrapeResult requested;
  for (const auto& h : hashes)
    if (auto it = all.find(h); it != all.end()) requested.insert(*it);
  return requested;
}

PeerId make_crawler_peer_id(std::uint64_t seed) {
  static constexpr std::string_view tag = "-SW0100-";
  Digest20::Bytes bytes{};
  std::copy(tag.begin(), tag.end(), bytes.begin());
  std::mt19937_64 rng{seed};
  static constexpr std::string_view alphabet = "0123456789abcdefghijklmnopqrstuvwxyz";
  for (std::size_t i = tag.size(); i < bytes.size(); ++i)
    bytes[i] = static_cast<std::uint8_t>(alphabet[rng() % alphabet.size()]);
  return Digest20{bytes};
}

} // namespace swarmwatch::tracker
