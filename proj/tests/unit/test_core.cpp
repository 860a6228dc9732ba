#include <gtest/gtest.h>

#include "swarmwatch/csv.hpp"
#include "swarmwatch/digest.hpp"
#include "swarmwatch/net.hpp"
#include "swarmwatch/time.hpp"

using namespace swarmwatch;

TEST(Ipv4, ParsesAndPrints) {
  auto ip = Ipv4::parse("31.0.2.255");
  ASSERT_TRUE(ip);
  EXPECT_EQ(ip->value(), (31U << 24) | (2U << 8) | 255U);
  EXPECT_EQ(ip->to_string(), "31.0.2.255");
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "1..2.3", "+1.2.3.4", "a.b.c.d", "1.2.3.4 "})
    EXPECT_FALSE(Ipv4::parse(bad)) << bad;
}

TEST(Ipv4, Bogons) {
  for (const char* s : {"0.1.2.3", "10.0.0.1", "127.0.0.1", "172.16.0.1", "172.31.255.255", "192.168.1.1",
                        "224.0.0.1", "239.255.255.255"})
    EXPECT_TRUE(Ipv4::parse(s)->is_bogon()) << s;
  for (const char* s : {"8.8.8.8", "172.15.255.255", "172.32.0.0", "192.169.0.1", "31.0.0.1"})
    EXPECT_FALSE(Ipv4::parse(s)->is_bogon()) << s;
}

TEST(Digest, Sha1KnownVectors) {
  // FIPS 180 test vectors.
  EXPECT_EQ(sha1("abc").hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(sha1("").hex(), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST(Digest, HexRoundTrip) {
  auto d = Digest20::from_hex("6DF633D16DB2663535A3956973907170EE61AB5B");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->hex(), "6df633d16db2663535a3956973907170ee61ab5b");
  EXPECT_FALSE(Digest20::from_hex("6df6"));
  EXPECT_FALSE(Digest20::from_hex("zz f633d16db2663535a3956973907170ee61ab5b"));
}

TEST(Time, Iso8601) {
  const auto t = make_instant(2013, 8, 12, 12, 0, 0);
  EXPECT_EQ(format_iso8601(t), "2013-08-12T12:00:00Z");
  EXPECT_EQ(format_compact(t), "20130812T120000Z");
  EXPECT_EQ(parse_iso8601("2013-08-12T12:00:00Z"), t);
  EXPECT_EQ(parse_iso8601("20130812T120000Z"), t);
  EXPECT_FALSE(parse_iso8601("2013-08-12T12:00:00"));
  EXPECT_FALSE(parse_iso8601("2013-13-12T12:00:00Z"));
}

TEST(Csv, SplitAndQuote) {
  std::vector<std::string> f;
  ASSERT_TRUE(csv::split_line(R"(a,"b,c","d""e",)", f));
  ASSERT_EQ(f.size(), 4U);
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "d\"e");
  EXPECT_EQ(f[3], "");
  EXPECT_FALSE(csv::split_line(R"(a,"b)", f));
  EXPECT_EQ(csv::quote("AT&T"), "AT&T");
  EXPECT_EQ(csv::quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::quote("say \"hi\""), "\"say \"\"hi\"\"\"");
}
