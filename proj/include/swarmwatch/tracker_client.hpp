#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/tracker_wire.hpp"

namespace swarmwatch::tracker {

/// Fetches a URL and returns the body of a 200 response; throws
/// TrackerError(transport_error) otherwise.
class HttpTransport {
public:
  virtual ~HttpTransport() = default;
  virtual std::string get(const std::string& url) = 0;
};

/// Sends one datagram and waits up to `timeout` for one reply from the same
/// endpoint; nullopt on timeout. Throws TrackerError(transport_error) when the
/// endpoint cannot be resolved.
class DatagramTransport {
public:
  virtual ~DatagramTransport() = default;
  virtual std::optional<std::string> exchange(const std::string& host, std::uint16_t port, std::string_view payload,
                                              std::chrono::milliseconds timeout) = 0;
};

struct HttpTransportOptions {
  std::chrono::milliseconds connect_timeout{10'000};
  std::chrono::milliseconds read_timeout{20'000};
  bool verify_tls = true;
};

std::shared_ptr<HttpTransport> make_http_transport(HttpTransportOptions options = {});
std::shared_ptr<DatagramTransport> make_udp_transport();

struct ClientOptions {
  /// One UDP attempt per entry, each waiting this long for each reply.
  std::vector<std::chrono::milliseconds> udp_timeouts{std::chrono::seconds{15}, std::chrono::seconds{30},
                                                      std::chrono::seconds{60}};
};

struct UdpTarget {
  std::string host;
  std::uint16_t port = 0;
};

/// "udp://host:port[/...]"
std::optional<UdpTarget> parse_udp_url(std::string_view url);

class TrackerClient {
public:
  TrackerClient(std::shared_ptr<HttpTransport> http, std::shared_ptr<DatagramTransport> udp,
                ClientOptions options = {});

  /// Dispatches on the URL scheme: http, https or udp.
  AnnounceResponse announce(const std::string& url, const AnnounceRequest& req) const;
  AnnounceResponse http_announce(const std::string& url, const AnnounceRequest& req) const;
  AnnounceResponse udp_announce(const UdpTarget& target, const AnnounceRequest& req) const;

  /// HTTP(S) scrape of 1..74 infohashes. Hashes the tracker does not know are
  /// absent from the result.
  ScrapeResult scrape(const std::string& announce_or_scrape_url, std::span<const Infohash> hashes) const;

  const ClientOptions& options() const { return options_; }

private:
  std::shared_ptr<HttpTransport> http_;
  std::shared_ptr<DatagramTransport> udp_;
  ClientOptions options_;
};

/// Recognizable client tag followed by random bytes.
PeerId make_crawler_peer_id(std::uint64_t seed);

} // namespace swarmwatch::tracker
