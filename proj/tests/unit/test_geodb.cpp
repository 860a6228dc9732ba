#include <gtest/gtest.h>

#include <random>

#include "swarmwatch/geodb.hpp"
#include "test_support.hpp"

using namespace swarmwatch;
using namespace swarmwatch::geodb;

namespace {

const std::string header = std::string(csv_header) + "\n";

// Linear-scan reference with its own bogon list.
const GeoRecord* scan(const std::vector<GeoRecord>& rows, std::uint32_t ip) {
  const std::uint32_t a = ip >> 24;
  const bool bogon = a == 0 || a == 10 || a == 127 || (a >= 224 && a < 240) || (ip >> 20) == 0xac1 || (ip >> 16) == 0xc0a8;
  if (bogon) return nullptr;
  for (const auto& r : rows)
    if (r.range_start <= ip && ip <= r.range_end) return &r;
  return nullptr;
}

} // namespace

TEST(GeoTable, ParsesQuotedFieldsAndIntegerBounds) {
  const auto t = GeoTable::parse(header +
                                 "520093696,520159231,US,CA,\"San Jose\",\"Comcast Cable, Inc.\",-121.89,37.34\n"
                                 "31.1.0.0,31.1.255.255,GR,Attica,Athens,OTE,23.7275,37.9838\n");
  ASSERT_EQ(t.size(), 2U);
  const auto* us = t.lookup(*Ipv4::parse("31.0.0.9"));
  ASSERT_NE(us, nullptr);
  EXPECT_EQ(us->isp, "Comcast Cable, Inc.");
  EXPECT_EQ(us->state, "CA");
  const auto* gr = t.lookup(*Ipv4::parse("31.1.200.1"));
  ASSERT_NE(gr, nullptr);
  EXPECT_EQ(gr->city, "Athens");
  EXPECT_EQ(gr->state, "") << "state only kept for US and CA";
  EXPECT_EQ(t.lookup(*Ipv4::parse("31.2.0.0")), nullptr);
}

TEST(GeoTable, RejectsOverlapWithBothLines) {
  try {
    GeoTable::parse(header + "1.0.0.0,1.0.0.255,GR,,,,0,0\n2.0.0.0,2.0.0.9,GR,,,,0,0\n1.0.0.200,1.0.1.0,GR,,,,0,0\n");
    FAIL();
  } catch (const GeoError& e) {
    EXPECT_EQ(e.code(), Errc::overlap_error);
    EXPECT_EQ(e.line_a(), 2U);
    EXPECT_EQ(e.line_b(), 4U);
  }
}

TEST(GeoTable, ParseErrors) {
  for (const std::string bad : {"x,1.0.0.0,GR,,,,0,0\n", "1.0.0.9,1.0.0.0,GR,,,,0,0\n", "1.0.0.0,1.0.0.1,Greece,,,,0,0\n",
                                "1.0.0.0,1.0.0.1,GR,,,,0,95\n", "1.0.0.0,1.0.0.1,GR,,,0,0\n", "1.0.0.0,1.0.0.1,GR,\"x,,,0,0\n"}) {
    try {
      GeoTable::parse(header + bad);
      ADD_FAILURE() << bad;
    } catch (const GeoError& e) {
      EXPECT_EQ(e.code(), Errc::parse_error) << bad;
      EXPECT_EQ(e.line_a(), 2U) << bad;
    }
  }
  EXPECT_THROW(GeoTable::parse("bogus header\n"), GeoError);
  try {
    GeoTable::load("/nonexistent/geo.csv");
    FAIL();
  } catch (const GeoError& e) {
    EXPECT_EQ(e.code(), Errc::io_error);
  }
}

TEST(GeoTable, BogonsNeverResolve) {
  std::vector<GeoRecord> all{{0, 0xFFFFFFFFU, "US", "", "", "", 0, 0}};
  const auto t = GeoTable::from_records(all);
  for (const char* ip : {"0.1.2.3", "10.9.9.9", "127.0.0.1", "172.16.0.1", "172.31.255.255", "192.168.1.1", "224.0.0.1", "239.255.255.255"})
    EXPECT_EQ(t.lookup(*Ipv4::parse(ip)), nullptr) << ip;
  for (const char* ip : {"172.32.0.1", "192.169.0.1", "11.0.0.1", "223.255.255.255", "240.0.0.1"})
    EXPECT_NE(t.lookup(*Ipv4::parse(ip)), nullptr) << ip;
}

TEST(GeoTable, LookupMatchesLinearScan) {
  std::mt19937 rng(11);
  std::vector<GeoRecord> rows;
  std::uint32_t cursor = 0;
  while (rows.size() < 2000) {
    cursor += rng() % 2000000;
    const std::uint32_t len = rng() % 1500000;
    if (cursor + static_cast<std::uint64_t>(len) >= 0xFFFFFFFFULL) break;
    rows.push_back({cursor, cursor + len, "GR", "", "", "isp" + std::to_string(rows.size()), 0, 0});
    cursor += len + 1;
  }
  auto shuffled = rows;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto t = GeoTable::from_records(shuffled);
  for (int i = 0; i < 20000; ++i) {
    std::uint32_t ip = rng();
    if (i % 3 == 0) {
      const auto& r = rows[rng() % rows.size()];
      ip = (i % 2) ? r.range_start : r.range_end;
    }
    const auto* want = scan(rows, ip);
    const auto* got = t.lookup(Ipv4{ip});
    ASSERT_EQ(want == nullptr, got == nullptr) << Ipv4{ip}.to_string();
    if (want) EXPECT_EQ(want->isp, got->isp);
  }
}

TEST(GeoTable, CsvRoundTrip) {
  const auto t = GeoTable::load(fixtures::data_file("geo_fixture.csv"));
  EXPECT_EQ(t.size(), 200U);
  const auto back = GeoTable::parse(t.to_csv());
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.records()[i].range_start, t.records()[i].range_start);
    EXPECT_EQ(back.records()[i].isp, t.records()[i].isp);
    EXPECT_DOUBLE_EQ(back.records()[i].latitude, t.records()[i].latitude);
  }
}

TEST(Region, Classification) {
  EXPECT_EQ(classify_region("GR"), Region::europe);
  EXPECT_EQ(classify_region("DE"), Region::europe);
  EXPECT_EQ(classify_region("US"), Region::north_america);
  EXPECT_EQ(classify_region("CA"), Region::north_america);
  EXPECT_EQ(classify_region("MX"), Region::other);
  EXPECT_EQ(classify_region("AU"), Region::australia);
  EXPECT_EQ(classify_region("NZ"), Region::other);
  EXPECT_EQ(classify_region(""), Region::unknown);
  EXPECT_EQ(classify_region("usa"), Region::unknown);
  const auto eu = europe_country_codes();
  EXPECT_TRUE(std::is_sorted(eu.begin(), eu.end()));
  EXPECT_EQ(country_name("GR"), "Greece");
  EXPECT_EQ(country_name("ZZ"), "ZZ");
}
