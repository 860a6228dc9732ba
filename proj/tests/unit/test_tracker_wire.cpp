#include <gtest/gtest.h>

#include <random>

#include "swarmwatch/bencode.hpp"
#include "swarmwatch/tracker_wire.hpp"

using namespace swarmwatch;
using namespace swarmwatch::tracker;

namespace {

// Big-endian packing written out by hand for the oracle byte strings.
void put(std::string& s, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

Digest20 digest_of(std::uint8_t fill) {
  std::string b(20, static_cast<char>(fill));
  b[0] = 0x00;
  b[19] = static_cast<char>(0xFF);
  return *Digest20::from_bytes(b);
}

} // namespace

TEST(Compact, ParsesSixByteEntries) {
  const std::string blob("\x01\x02\x03\x04\x1a\xe1\x1f\x00\x00\x01\x00\x50", 12);
  const auto peers = parse_compact_peers(blob);
  ASSERT_EQ(peers.size(), 2U);
  EXPECT_EQ(peers[0].to_string(), "1.2.3.4:6881");
  EXPECT_EQ(peers[1].to_string(), "31.0.0.1:80");
  EXPECT_EQ(compact_peers(peers), blob);
  EXPECT_THROW(parse_compact_peers(blob.substr(0, 7)), TrackerError);
}

TEST(Compact, RandomRoundTripsAreByteIdentical) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string blob(6 * (rng() % 40), '\0');
    for (auto& c : blob) c = static_cast<char>(rng());
    EXPECT_EQ(compact_peers(parse_compact_peers(blob)), blob);
  }
}

TEST(Compact, Peers6CountsEighteenByteEntries) {
  EXPECT_EQ(count_compact_peers6(std::string(36, 'x')), 2U);
  EXPECT_THROW(count_compact_peers6(std::string(20, 'x')), TrackerError);
}

TEST(Compact, NormalizeDropsZeroPortsAndDuplicates) {
  const Endpoint a{Ipv4(1, 2, 3, 4), 1}, b{Ipv4(1, 2, 3, 4), 0}, c{Ipv4(5, 6, 7, 8), 2};
  EXPECT_EQ(normalize_peers({a, b, c, a}), (std::vector<Endpoint>{a, c}));
}

TEST(Http, AnnounceUrlEncodesRawBytes) {
  AnnounceRequest req;
  req.infohash = digest_of(0x41);
  req.peer_id = digest_of(0x2d);
  req.port = 6881;
  req.left = 1;
  req.numwant = 200;
  req.event = Event::started;
  const std::string a18(18, 'A');
  const std::string d18(18, '-');
  EXPECT_EQ(http_announce_url("http://t.example/announce", req),
            "http://t.example/announce?info_hash=%00" + a18 + "%FF&peer_id=%00" + d18 +
                "%FF&port=6881&uploaded=0&downloaded=0&left=1&compact=1&numwant=200&event=started");
  EXPECT_EQ(http_announce_url("http://t.example/announce?passkey=x", req).substr(0, 46),
            "http://t.example/announce?passkey=x&info_hash=");
}

TEST(Http, AnnounceQueryRoundTrip) {
  AnnounceRequest req;
  req.infohash = digest_of(0x7e);
  req.peer_id = digest_of(0x20);
  req.port = 51413;
  req.uploaded = 5;
  req.downloaded = 6;
  req.left = 7;
  req.numwant = 50;
  req.key = 0xdeadbeef;
  req.event = Event::stopped;
  const auto url = http_announce_url("http://x/announce", req);
  EXPECT_EQ(parse_announce_query(url.substr(url.find('?') + 1)), req);
  EXPECT_THROW(parse_announce_query("peer_id=x"), TrackerError);
}

TEST(Http, ParsesCompactAndDictionaryBodies) {
  const std::string compact = std::string("d8:completei3e10:incompletei4e8:intervali1800e5:peers6:") +
                              std::string("\x01\x02\x03\x04\x1a\xe1", 6) + "6:peers618:" + std::string(18, 'z') +
                              "e";
  const auto r = parse_announce_body(compact);
  EXPECT_EQ(r.interval.count(), 1800);
  EXPECT_EQ(r.seeders, 3U);
  EXPECT_EQ(r.leechers, 4U);
  ASSERT_EQ(r.peers.size(), 1U);
  EXPECT_EQ(r.peers[0].to_string(), "1.2.3.4:6881");
  EXPECT_EQ(r.ipv6_peers, 1U);

  const auto d = parse_announce_body("d8:intervali60e5:peersld2:ip7:5.6.7.84:porti99eeee");
  ASSERT_EQ(d.peers.size(), 1U);
  EXPECT_EQ(d.peers[0].to_string(), "5.6.7.8:99");
}

TEST(Http, FailureReasonSurfaces) {
  try {
    parse_announce_body(encode_failure_body("torrent not registered"));
    FAIL();
  } catch (const TrackerError& e) {
    EXPECT_EQ(e.code(), Errc::tracker_failure);
    EXPECT_STREQ(e.what(), "torrent not registered");
  }
  try {
    parse_announce_body("not bencode");
    FAIL();
  } catch (const TrackerError& e) {
    EXPECT_EQ(e.code(), Errc::malformed_response);
  }
}

TEST(Http, AnnounceBodyRoundTrip) {
  AnnounceResponse r;
  r.interval = std::chrono::seconds{900};
  r.seeders = 2;
  r.leechers = 9;
  r.peers = {{Ipv4(31, 0, 0, 1), 1000}, {Ipv4(31, 0, 0, 2), 2000}};
  const auto back = parse_announce_body(encode_announce_body(r));
  EXPECT_EQ(back.interval, r.interval);
  EXPECT_EQ(back.seeders, 2U);
  EXPECT_EQ(back.leechers, 9U);
  EXPECT_EQ(back.peers, r.peers);
}

TEST(Scrape, UrlConvention) {
  EXPECT_EQ(scrape_url_from_announce("http://t/announce"), "http://t/scrape");
  EXPECT_EQ(scrape_url_from_announce("http://t/x/announce.php?k=1"), "http://t/x/scrape.php?k=1");
  EXPECT_FALSE(scrape_url_from_announce("http://t/a"));
}

TEST(Scrape, BodyRoundTrip) {
  ScrapeResult in;
  in[digest_of(1)] = {1, 2, 3};
  in[digest_of(2)] = {4, 5, 6};
  EXPECT_EQ(parse_scrape_body(encode_scrape_body(in)), in);
  const std::vector<Infohash> hashes{digest_of(1), digest_of(2)};
  const auto url = http_scrape_url("http://t/scrape", hashes);
  EXPECT_EQ(parse_scrape_query(url.substr(url.find('?') + 1)), hashes);
}

TEST(Udp, ConnectRequestLayout) {
  std::string expected;
  put(expected, 0x41727101980ULL, 8);
  put(expected, 0, 4);
  put(expected, 0xCAFEBABE, 4);
  EXPECT_EQ(udp::encode_connect_request(0xCAFEBABE), expected);
}

TEST(Udp, AnnounceRequestLayout) {
  AnnounceRequest req;
  req.infohash = digest_of(0x11);
  req.peer_id = digest_of(0x22);
  req.downloaded = 10;
  req.left = 20;
  req.uploaded = 30;
  req.event = Event::started;
  req.key = 0x01020304;
  req.numwant = 200;
  req.port = 6881;
  std::string expected;
  put(expected, 0x1122334455667788ULL, 8);
  put(expected, 1, 4);
  put(expected, 77, 4);
  expected += std::string(req.infohash.view());
  expected += std::string(req.peer_id.view());
  put(expected, 10, 8);
  put(expected, 20, 8);
  put(expected, 30, 8);
  put(expected, 2, 4);
  put(expected, 0, 4);
  put(expected, 0x01020304, 4);
  put(expected, 200, 4);
  put(expected, 6881, 2);
  ASSERT_EQ(expected.size(), 98U);
  const auto bytes = udp::encode_announce_request(0x1122334455667788ULL, 77, req);
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(udp::parse_announce_request(bytes), req);
  EXPECT_FALSE(udp::parse_announce_request(bytes.substr(0, 97)));
}

TEST(Udp, RepliesParse) {
  std::string connect;
  put(connect, 0, 4);
  put(connect, 9, 4);
  put(connect, 0xAABBCCDDEEFF0011ULL, 8);
  EXPECT_EQ(udp::encode_connect_response(9, 0xAABBCCDDEEFF0011ULL), connect);
  const auto reply = udp::parse_reply(connect);
  EXPECT_EQ(reply.action, udp::Action::connect);
  EXPECT_EQ(reply.transaction_id, 9U);
  EXPECT_EQ(udp::parse_connect_payload(reply.payload), 0xAABBCCDDEEFF0011ULL);

  AnnounceResponse r;
  r.interval = std::chrono::seconds{1800};
  r.leechers = 4;
  r.seeders = 5;
  r.peers = {{Ipv4(1, 2, 3, 4), 6881}};
  std::string announce;
  put(announce, 1, 4);
  put(announce, 3, 4);
  put(announce, 1800, 4);
  put(announce, 4, 4);
  put(announce, 5, 4);
  announce += std::string("\x01\x02\x03\x04\x1a\xe1", 6);
  EXPECT_EQ(udp::encode_announce_response(3, r), announce);
  const auto back = udp::parse_announce_payload(udp::parse_reply(announce).payload);
  EXPECT_EQ(back.seeders, 5U);
  EXPECT_EQ(back.leechers, 4U);
  EXPECT_EQ(back.peers, r.peers);

  const auto err = udp::parse_reply(udp::encode_error(4, "nope"));
  EXPECT_EQ(err.action, udp::Action::error);
  EXPECT_EQ(err.payload, "nope");
  EXPECT_THROW(udp::parse_reply("abc"), TrackerError);
}
