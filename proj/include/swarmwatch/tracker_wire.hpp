#pragma once

// Tracker wire formats: HTTP announce/scrape query strings and bencoded
// bodies, the compact peer format, and UDP tracker framing. Both the client
// and the mock tracker are built on these functions.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/net.hpp"

namespace swarmwatch::tracker {

enum class Errc {
  transport_error,
  tracker_failure,
  malformed_response,
  timeout,
  transaction_id_mismatch,
  tracker_error,
  bad_url,
  bad_request,
};

class TrackerError : public std::runtime_error {
public:
  TrackerError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

private:
  Errc code_;
};

/// Values match the UDP tracker event numbering.
enum class Event : std::uint32_t { none = 0, completed = 1, started = 2, stopped = 3 };

inline constexpr std::int32_t default_numwant = 200;

struct AnnounceRequest {
  Infohash infohash;
  PeerId peer_id;
  std::uint16_t port = 6881;
  std::uint64_t uploaded = 0;
  std::uint64_t downloaded = 0;
  std::uint64_t left = 1;
  Event event = Event::none;
  std::int32_t numwant = default_numwant;
  std::uint32_t key = 0;

  friend bool operator==(const AnnounceRequest&, const AnnounceRequest&) = default;
};

struct AnnounceResponse {
  std::chrono::seconds interval{0};
  std::uint32_t seeders = 0;
  std::uint32_t leechers = 0;
  /// IPv4 peers; unique, nonzero ports.
  std::vector<Endpoint> peers;
  /// IPv6 entries seen in `peers6`; parsed for validity, not reported.
  std::size_t ipv6_peers = 0;
};

struct ScrapeCounters {
  std::uint32_t seeders = 0;
  std::uint32_t leechers = 0;
  std::uint32_t completed = 0;

  friend bool operator==(const ScrapeCounters&, const ScrapeCounters&) = default;
};

using ScrapeResult = std::map<Infohash, ScrapeCounters>;

inline constexpr std::size_t max_scrape_hashes = 74;

// ---- compact peers ----

/// Splits a compact blob into 6-byte entries (4 address + 2 port, network
/// order). Throws malformed_response if the length is not a multiple of 6.
std::vector<Endpoint> parse_compact_peers(std::string_view blob);
std::string compact_peers(std::span<const Endpoint> peers);
/// Number of 18-byte IPv6 entries; throws if the length is not a multiple of 18.
std::size_t count_compact_peers6(std::string_view blob);

/// Drops zero ports and duplicate endpoints, keeping first occurrence order.
std::vector<Endpoint> normalize_peers(std::vector<Endpoint> peers);

// ---- HTTP ----

/// RFC 3986 unreserved characters pass through; everything else is %XX.
std::string url_encode(std::string_view raw);

/// Appends the announce query to `announce_url`.
std::string http_announce_url(std::string_view announce_url, const AnnounceRequest& req);
/// Parses the query part of a request target (mock tracker side).
AnnounceRequest parse_announce_query(std::string_view query);

AnnounceResponse parse_announce_body(std::string_view body);
std::string encode_announce_body(const AnnounceResponse& response);
std::string encode_failure_body(std::string_view reason);

/// Replaces the final "announce" path segment with "scrape"; nullopt if the
/// tracker does not follow that convention.
std::optional<std::string> scrape_url_from_announce(std::string_view announce_url);
std::string http_scrape_url(std::string_view scrape_url, std::span<const Infohash> hashes);
std::vector<Infohash> parse_scrape_query(std::string_view query);
ScrapeResult parse_scrape_body(std::string_view body);
std::string encode_scrape_body(const ScrapeResult& result);

// ---- UDP ----

namespace udp {

inline constexpr std::uint64_t protocol_id = 0x41727101980ULL;

enum class Action : std::uint32_t { connect = 0, announce = 1, scrape = 2, error = 3 };

inline constexpr std::size_t connect_request_size = 16;
inline constexpr std::size_t announce_request_size = 98;

std::string encode_connect_request(std::uint32_t transaction_id);
std::string encode_connect_response(std::uint32_t transaction_id, std::uint64_t connection_id);
std::string encode_announce_request(std::uint64_t connection_id, std::uint32_t transaction_id,
                                    const AnnounceRequest& req);
std::string encode_announce_response(std::uint32_t transaction_id, const AnnounceResponse& response);
std::string encode_error(std::uint32_t transaction_id, std::string_view message);

struct RequestHeader {
  std::uint64_t connection_id;
  Action action;
  std::uint32_t transaction_id;
};

/// First 16 bytes of any client request; nullopt if shorter.
std::optional<RequestHeader> parse_request_header(std::string_view datagram);
/// Requires the full 98-byte announce request.
std::optional<AnnounceRequest> parse_announce_request(std::string_view datagram);

struct Reply {
  Action action;
  std::uint32_t transaction_id;
  std::string_view payload;
};

/// Splits the 8-byte reply header; throws malformed_response when short.
Reply parse_reply(std::string_view datagram);
std::uint64_t parse_connect_payload(std::string_view payload);
AnnounceResponse parse_announce_payload(std::string_view payload);

} // namespace udp

} // namespace swarmwatch::tracker
