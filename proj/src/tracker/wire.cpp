#include "swarmwatch/tracker_wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <fmt/format.h>

#include "swarmwatch/bencode.hpp"
#include "swarmwatch/torrent.hpp"

namespace swarmwatch::tracker {

namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw TrackerError(Errc::malformed_response, "tracker: malformed response: " + why);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint64_t get_be(std::string_view in, std::size_t offset, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v = (v << 8) | static_cast<unsigned char>(in[offset + i]);
  return v;
}

std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  return static_cast<std::uint32_t>(get_be(in, offset, 4));
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

/// Calls `fn(key, value)` for every `key=value` pair in a query string.
template <typename Fn>
void for_each_param(std::string_view query, Fn fn) {
  if (auto q = query.find('?'); q != std::string_view::npos) query.remove_prefix(q + 1);
  while (!query.empty()) {
    const auto amp = query.find('&');
    const std::string_view param = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    const auto eq = param.find('=');
    if (eq == std::string_view::npos) fn(param, std::string_view{});
    else fn(param.substr(0, eq), param.substr(eq + 1));
  }
}

char separator_for(std::string_view url) { return url.find('?') == std::string_view::npos ? '?' : '&'; }

std::uint32_t counter(const bencode::Value& dict, std::string_view key) {
  const auto* v = dict.find(key);
  if (v == nullptr) return 0;
  if (!v->is_integer() || v->as_integer() < 0) malformed(fmt::format("'{}' is not a counter", key));
  return static_cast<std::uint32_t>(std::min<bencode::Integer>(v->as_integer(), UINT32_MAX));
}

bencode::Value decode_body(std::string_view body) {
  try {
    bencode::Value v = bencode::decode(body, {.strict = false});
    if (!v.is_dict()) malformed("body is not a dictionary");
    return v;
  } catch (const bencode::Error& e) {
    malformed(e.what());
  }
}

} // namespace

std::vector<Endpoint> parse_compact_peers(std::string_view blob) {
  if (blob.size() % 6 != 0) malformed(fmt::format("compact peers length {} is not a multiple of 6", blob.size()));
  std::vector<Endpoint> peers;
  peers.reserve(blob.size() / 6);
  for (std::size_t i = 0; i < blob.size(); i += 6)
    peers.push_back({Ipv4{get_u32(blob, i)}, static_cast<std::uint16_t>(get_be(blob, i + 4, 2))});
  return peers;
}

std::string compact_peers(std::span<const Endpoint> peers) {
  std::string out;
  out.reserve(peers.size() * 6);
  for (const auto& p : peers) {
    put_u32(out, p.ip.value());
    put_u16(out, p.port);
  }
  return out;
}

std::size_t count_compact_peers6(std::string_view blob) {
  if (blob.size() % 18 != 0) malformed(fmt::format("compact peers6 length {} is not a multiple of 18", blob.size()));
  return blob.size() / 18;
}

std::vector<Endpoint> normalize_peers(std::vector<Endpoint> peers) {
  std::set<Endpoint> seen;
  std::vector<Endpoint> out;
  out.reserve(peers.size());
  for (const auto& p : peers)
    if (p.port != 0 && seen.insert(p).second) out.push_back(p);
  return out;
}

std::string url_encode(std::string_view raw) {
  std::string out;
  out.reserve(raw.size() * 3);
  for (unsigned char c : raw) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') out.push_back(static_cast<char>(c));
    else fmt::format_to(std::back_inserter(out), "%{:02X}", c);
  }
  return out;
}

std::string http_announce_url(std::string_view announce_url, const AnnounceRequest& req) {
  std::string url{announce_url};
  url.push_back(separator_for(announce_url));
  fmt::format_to(std::back_inserter(url), "info_hash={}&peer_id={}&port={}&uploaded={}&downloaded={}&left={}&compact=1&numwant={}",
                 url_encode(req.infohash.view()), url_encode(req.peer_id.view()), req.port, req.uploaded,
                 req.downloaded, req.left, req.numwant);
  if (req.key != 0) fmt::format_to(std::back_inserter(url), "&key={:08x}", req.key);
  switch (req.event) {
  case Event::none: break;
  case Event::started: url += "&event=started"; break;
  case Event::stopped: url += "&event=stopped"; break;
  case Event::completed: url += "&event=completed"; break;
  }
  return url;
}

AnnounceRequest parse_announce_query(std::string_view query) {
  AnnounceRequest req;
  bool have_hash = false, have_peer_id = false, have_port = false;
  const auto bad = [](std::string_view what) {
    throw TrackerError(Errc::bad_request, fmt::format("tracker: bad announce parameter '{}'", what));
  };
  for_each_param(query, [&](std::string_view key, std::string_view value) {
    if (key == "info_hash") {
      auto d = Digest20::from_bytes(percent_decode(value));
      if (!d) bad(key);
      req.infohash = *d;
      have_hash = true;
    } else if (key == "peer_id") {
      auto d = Digest20::from_bytes(percent_decode(value));
      if (!d) bad(key);
      req.peer_id = *d;
      have_peer_id = true;
    } else if (key == "port") {
      auto p = parse_number<std::uint16_t>(value);
      if (!p || *p == 0) bad(key);
      req.port = *p;
      have_port = true;
    } else if (key == "uploaded" || key == "downloaded" || key == "left") {
      auto n = parse_number<std::uint64_t>(value);
      if (!n) bad(key);
      (key == "uploaded" ? req.uploaded : key == "downloaded" ? req.downloaded : req.left) = *n;
    } else if (key == "numwant") {
      auto n = parse_number<std::int32_t>(value);
      if (!n || *n < 0) bad(key);
      req.numwant = *n;
    } else if (key == "key") {
      std::uint32_t k = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), k, 16);
      if (ec == std::errc{} && ptr == value.data() + value.size()) req.key = k;
    } else if (key == "event") {
      if (value == "started") req.event = Event::started;
      else if (value == "stopped") req.event = Event::stopped;
      else if (value == "completed") req.event = Event::completed;
      else if (!value.empty()) bad(key);
    }
  });
  if (!have_hash) bad("info_hash");
  if (!have_peer_id) bad("peer_id");
  if (!have_port) bad("port");
  return req;
}

AnnounceResponse parse_announce_body(std::string_view body) {
  const bencode::Value root = decode_body(body);
  if (const auto* failure = root.find("failure reason"); failure != nullptr) {
    throw TrackerError(Errc::tracker_failure, failure->is_bytes() ? failure->as_bytes() : "tracker failure");
  }
  AnnounceResponse r;
  if (const auto* interval = root.find("interval"); interval != nullptr && interval->is_integer())
    r.interval = std::chrono::seconds{interval->as_integer()};
  r.seeders = counter(root, "complete");
  r.leechers = counter(root, "incomplete");

  std::vector<Endpoint> peers;
  if (const auto* blob = root.find("peers"); blob != nullptr) {
    if (blob->is_bytes()) {
      peers = parse_compact_peers(blob->as_bytes());
    } else if (blob->is_list()) {
      for (const auto& entry : blob->as_list()) {
        const auto* ip = entry.find("ip");
        const auto* port = entry.find("port");
        if (ip == nullptr || port == nullptr || !ip->is_bytes() || !port->is_integer()) malformed("bad peer dictionary");
        auto addr = Ipv4::parse(ip->as_bytes());
        if (!addr) continue;
        if (port->as_integer() < 0 || port->as_integer() > 65535) malformed("peer port out of range");
        peers.push_back({*addr, static_cast<std::uint16_t>(port->as_integer())});
      }
    } else {
      malformed("'peers' has unexpected type");
    }
  }
  if (const auto* blob6 = root.find("peers6"); blob6 != nullptr && blob6->is_bytes())
    r.ipv6_peers = count_compact_peers6(blob6->as_bytes());
  r.peers = normalize_peers(std::move(peers));
  return r;
}

std::string encode_announce_body(const AnnounceResponse& response) {
  bencode::Dict d;
  d.emplace_back("complete", static_cast<bencode::Integer>(response.seeders));
  d.emplace_back("incomplete", static_cast<bencode::Integer>(response.leechers));
  d.emplace_back("interval", static_cast<bencode::Integer>(response.interval.count()));
  d.emplace_back("peers", compact_peers(response.peers));
  return bencode::encode(d);
}

std::string encode_failure_body(std::string_view reason) {
  return bencode::encode(bencode::Dict{{"failure reason", bencode::Bytes{reason}}});
}

std::optional<std::string> scrape_url_from_announce(std::string_view announce_url) {
  const auto query = announce_url.find('?');
  const std::string_view path = announce_url.substr(0, query);
  const auto slash = path.rfind('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const std::string_view last = path.substr(slash + 1);
  if (last.rfind("announce", 0) != 0) return std::nullopt;
  std::string out{path.substr(0, slash + 1)};
  out += "scrape";
  out += last.substr(8);
  if (query != std::string_view::npos) out += announce_url.substr(query);
  return out;
}

std::string http_scrape_url(std::string_view scrape_url, std::span<const Infohash> hashes) {
  std::string url{scrape_url};
  char sep = separator_for(scrape_url);
  for (const auto& h : hashes) {
    url.push_back(sep);
    url += "info_hash=" + url_encode(h.view());
    sep = '&';
  }
  return url;
}

std::vector<Infohash> parse_scrape_query(std::string_view query) {
  std::vector<Infohash> hashes;
  for_each_param(query, [&](std::string_view key, std::string_view value) {
    if (key != "info_hash") return;
    auto d = Digest20::from_bytes(percent_decode(value));
    if (!d) throw TrackerError(Errc::bad_request, "tracker: bad scrape info_hash");
    hashes.push_back(*d);
  });
  return hashes;
}

ScrapeResult parse_scrape_body(std::string_view body) {
  const bencode::Value root = decode_body(body);
  if (const auto* failure = root.find("failure reason"); failure != nullptr)
    throw TrackerError(Errc::tracker_failure, failure->is_bytes() ? failure->as_bytes() : "tracker failure");
  const auto* files = root.find("files");
  if (files == nullptr || !files->is_dict()) malformed("scrape response without 'files'");
  ScrapeResult result;
  for (const auto& [key, entry] : files->as_dict()) {
    auto hash = Digest20::from_bytes(key);
    if (!hash || !entry.is_dict()) malformed("bad scrape entry");
    result[*hash] = {counter(entry, "complete"), counter(entry, "incomplete"), counter(entry, "downloaded")};
  }
  return result;
}

std::string encode_scrape_body(const ScrapeResult& result) {
  bencode::Dict files;
  for (const auto& [hash, c] : result) {
    files.emplace_back(std::string{hash.view()},
                       bencode::Dict{{"complete", bencode::Integer{c.seeders}},
                                     {"downloaded", bencode::Integer{c.completed}},
                                     {"incomplete", bencode::Integer{c.leechers}}});
  }
  return bencode::encode(bencode::Dict{{"files", std::move(files)}});
}

namespace udp {

std::string encode_connect_request(std::uint32_t transaction_id) {
  std::string out;
  put_u64(out, protocol_id);
  put_u32(out, static_cast<std::uint32_t>(Action::connect));
  put_u32(out, transaction_id);
  return out;
}

std::string encode_connect_response(std::uint32_t transaction_id, std::uint64_t connection_id) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(Action::connect));
  put_u32(out, transaction_id);
  put_u64(out, connection_id);
  return out;
}

std::string encode_announce_request(std::uint64_t connection_id, std::uint32_t transaction_id,
                                    const AnnounceRequest& req) {
  std::string out;
  out.reserve(announce_request_size);
  put_u64(out, connection_id);
  put_u32(out, static_cast<std::uint32_t>(Action::announce));
  put_u32(out, transaction_id);
  out += req.infohash.view();
  out += req.peer_id.view();
  put_u64(out, req.downloaded);
  put_u64(out, req.left);
  put_u64(out, req.uploaded);
  put_u32(out, static_cast<std::uint32_t>(req.event));
  put_u32(out, 0); // IP: let the tracker use the source address
  put_u32(out, req.key);
  put_u32(out, static_cast<std::uint32_t>(req.numwant));
  put_u16(out, req.port);
  return out;
}

std::string encode_announce_response(std::uint32_t transaction_id, const AnnounceResponse& response) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(Action::announce));
  put_u32(out, transaction_id);
  put_u32(out, static_cast<std::uint32_t>(response.interval.count()));
  put_u32(out, response.leechers);
  put_u32(out, response.seeders);
  out += compact_peers(response.peers);
  return out;
}

std::string encode_error(std::uint32_t transaction_id, std::string_view message) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(Action::error));
  put_u32(out, transaction_id);
  out += message;
  return out;
}

std::optional<RequestHeader> parse_request_header(std::string_view datagram) {
  if (datagram.size() < 16) return std::nullopt;
  return RequestHeader{get_be(datagram, 0, 8), static_cast<Action>(get_u32(datagram, 8)), get_u32(datagram, 12)};
}

std::optional<AnnounceRequest> parse_announce_request(std::string_view datagram) {
  if (datagram.size() < announce_request_size) return std::nullopt;
  AnnounceRequest req;
  req.infohash = *Digest20::from_bytes(datagram.substr(16, 20));
  req.peer_id = *Digest20::from_bytes(datagram.substr(36, 20));
  req.downloaded = get_be(datagram, 56, 8);
  req.left = get_be(datagram, 64, 8);
  req.uploaded = get_be(datagram, 72, 8);
  const std::uint32_t event = get_u32(datagram, 80);
  if (event > 3) return std::nullopt;
  req.event = static_cast<Event>(event);
  req.key = get_u32(datagram, 88);
  req.numwant = static_cast<std::int32_t>(get_u32(datagram, 92));
  req.port = static_cast<std::uint16_t>(get_be(datagram, 96, 2));
  return req;
}

Reply parse_reply(std::string_view datagram) {
  if (datagram.size() < 8) malformed(fmt::format("UDP reply of {} bytes", datagram.size()));
  const std::uint32_t action = get_u32(datagram, 0);
  if (action > 3) malformed(fmt::format("unknown UDP action {}", action));
  return {static_cast<Action>(action), get_u32(datagram, 4), datagram.substr(8)};
}

std::uint64_t parse_connect_payload(std::string_view payload) {
  if (payload.size() < 8) malformed("short UDP connect reply");
  return get_be(payload, 0, 8);
}

AnnounceResponse parse_announce_payload(std::string_view payload) {
  if (payload.size() < 12) malformed("short UDP announce reply");
  AnnounceResponse r;
  r.interval = std::chrono::seconds{get_u32(payload, 0)};
  r.leechers = get_u32(payload, 4);
  r.seeders = get_u32(payload, 8);
  r.peers = normalize_peers(parse_compact_peers(payload.substr(12)));
  return r;
}

} // namespace udp

} // namespace swarmwatch::tracker
