#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "swarmwatch/cli.hpp"
#include "swarmwatch/sim.hpp"
#include "test_support.hpp"

using namespace swarmwatch;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result swarmwatch_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarmwatch");
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string geo_path() { return fixtures::data_file("geo_fixture.csv").string(); }

const geodb::GeoTable& fixture_geo() {
  static const auto geo = geodb::GeoTable::load(geo_path());
  return geo;
}

Infohash hash_of(int i) {
  std::string hex(40, 'b');
  hex[39] = static_cast<char>('0' + i);
  return *Digest20::from_hex(hex);
}

TorrentRegistry labelled_registry() {
  TorrentRegistry r;
  r.add({1, hash_of(1), "A.S01E01", 10, "Show A", 1, 1, ""});
  r.add({2, hash_of(2), "A.S01E01.720p", 10, "Show A", 1, 1, "720p"});
  r.add({3, hash_of(3), "B.S02E05", 10, "Show B", 2, 5, ""});
  return r;
}

struct Workspace {
  Workspace() {
    fixtures::write_file(dir / "registry.csv", labelled_registry().to_csv());
  }
  std::vector<std::string> base() const {
    return {"--store", (dir / "store").string(), "--geo", geo_path(), "--registry", (dir / "registry.csv").string()};
  }
  std::vector<std::string> with(std::vector<std::string> rest) const {
    auto a = base();
    a.insert(a.end(), rest.begin(), rest.end());
    return a;
  }
  fixtures::TempDir dir;
};

// Four cycles of torrents 1 and 2 written as snapshot files.
fs::path write_eight_snapshots(const Workspace& ws) {
  const auto snaps = ws.dir / "snaps";
  const Instant t0 = make_instant(2013, 8, 12, 0, 0, 0);
  for (int cycle = 0; cycle < 4; ++cycle)
    for (std::uint32_t id = 1; id <= 2; ++id) {
      crawler::CrawlCycleResult r;
      r.torrent_id = id;
      r.infohash = hash_of(static_cast<int>(id));
      r.started_at = t0 + 120s * cycle;
      for (std::uint32_t h = 1; h <= 3 + id; ++h) r.peers.insert({Ipv4{(31U << 24) | (h * 65536U) | id}, 6881});
      crawler::write_snapshot(snaps, crawler::make_snapshot(r, fixture_geo()));
    }
  return snaps;
}

} // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(swarmwatch_cli({}).code, 2);
  EXPECT_EQ(swarmwatch_cli({"frobnicate"}).code, 2);
  Workspace ws;
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "nonsense"})).code, 2);
  EXPECT_EQ(swarmwatch_cli(ws.with({"--numwant", "0", "report", "swarms"})).code, 2);
  EXPECT_EQ(swarmwatch_cli({"--geo", "/no/such.csv", "report", "swarms"}).code, 2);
  EXPECT_EQ(swarmwatch_cli({"--help"}).code, 0);
}

TEST(Cli, ParseDuration) {
  EXPECT_EQ(cli::parse_duration("90s"), Seconds{90});
  EXPECT_EQ(cli::parse_duration("15m"), Seconds{900});
  EXPECT_EQ(cli::parse_duration("2h"), Seconds{7200});
  EXPECT_EQ(cli::parse_duration("3d"), Seconds{3 * 86400});
  EXPECT_FALSE(cli::parse_duration("3w"));
  EXPECT_FALSE(cli::parse_duration("h"));
}

TEST(Cli, IngestEightThenDedup) {
  Workspace ws;
  const auto snaps = write_eight_snapshots(ws);
  auto r = swarmwatch_cli(ws.with({"ingest", snaps.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("files=8 deduped=0 failed=0"), std::string::npos) << r.out;
  const auto before = swarmwatch_cli(ws.with({"export", "peers"})).out;
  const auto activity = swarmwatch_cli(ws.with({"report", "activity"})).out;

  r = swarmwatch_cli(ws.with({"ingest", snaps.string()}));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("deduped=8"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("peers_upserted=0"), std::string::npos) << r.out;
  EXPECT_EQ(swarmwatch_cli(ws.with({"export", "peers"})).out, before);
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "activity"})).out, activity);
}

TEST(Cli, OneCorruptFileAmongEight) {
  Workspace ws;
  const auto snaps = write_eight_snapshots(ws);
  fs::path victim;
  for (const auto& e : fs::recursive_directory_iterator(snaps))
    if (e.is_regular_file()) victim = e.path();
  fixtures::write_file(victim, "<crawl torrent_id=\"1\">");
  const auto r = swarmwatch_cli(ws.with({"ingest", snaps.string()}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("files=7 deduped=0 failed=1"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find(victim.string()), std::string::npos) << r.err;
}

TEST(Cli, ReportsFromCountsAndSnapshots) {
  Workspace ws;
  fixtures::write_file(ws.dir / "counts.csv", "torrents,peers\n1,600\n2,100\n1 2,50\n3,250\n");
  auto r = swarmwatch_cli(ws.with({"ingest", "--counts", (ws.dir / "counts.csv").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("counted_peers=1000"), std::string::npos);

  r = swarmwatch_cli(ws.with({"report", "swarms"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "label,torrent_ids,distinct_ips,overall_pct\n"
                   "A.S01E01,1,650,65.00\n"
                   "A.S01E01.720p,2,150,15.00\n"
                   "B.S02E05,3,250,25.00\n");
  r = swarmwatch_cli(ws.with({"report", "episodes"}));
  EXPECT_NE(r.out.find("Show A S01E01,1;2,750,75.00"), std::string::npos) << r.out;

  r = swarmwatch_cli(ws.with({"report", "venn", "Show A", "Show B"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pair_of_union,Show A & Show B,0,0.00"), std::string::npos) << r.out;

  // Three disjoint sets: every shared region is printed with a zero count.
  r = swarmwatch_cli(ws.with({"report", "venn", "x=1", "y=3", "z=2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* region : {"region,x & y,0,", "region,x & z,50,", "region,y & z,0,", "region,x & y & z,0,"})
    EXPECT_NE(r.out.find(region), std::string::npos) << region << "\n" << r.out;
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "venn", "1"})).code, 2);
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "venn", "Nope", "1"})).code, 1);

  const auto json = swarmwatch_cli(ws.with({"--json", "report", "swarms"}));
  EXPECT_NE(json.out.find("\"overall_pct\":65.0"), std::string::npos) << json.out;

  // Reports are byte-identical when regenerated.
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "swarms"})).out, swarmwatch_cli(ws.with({"report", "swarms"})).out);
}

TEST(Cli, GeoTimeseriesAndExports) {
  Workspace ws;
  const auto snaps = write_eight_snapshots(ws);
  ASSERT_EQ(swarmwatch_cli(ws.with({"ingest", snaps.string()})).code, 0);

  auto r = swarmwatch_cli(ws.with({"report", "geo", "--level", "city", "--n", "3"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1,\"Athens, Greece\",GR,Athens,"), std::string::npos) << r.out;
  EXPECT_EQ(swarmwatch_cli(ws.with({"report", "geo", "--level", "state"})).code, 2);

  r = swarmwatch_cli(ws.with({"report", "timeseries", "--torrent", "2"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("2013-08-12T00:06:00Z,5,"), std::string::npos) << r.out;

  const auto out_file = ws.dir / "crawl_files.csv";
  r = swarmwatch_cli(ws.with({"--out", out_file.string(), "export", "crawl_files"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = fixtures::read_file(out_file);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);

  r = swarmwatch_cli(ws.with({"report", "sessions", "--mode", "snapshots", "--snapshots", snaps.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",360,4"), std::string::npos) << r.out;
}

TEST(Cli, StorePathFromEnvironment) {
  Workspace ws;
  ::setenv(cli::store_env_var, (ws.dir / "envstore").c_str(), 1);
  fixtures::write_file(ws.dir / "counts.csv", "torrents,peers\n1,5\n");
  const auto r = swarmwatch_cli({"--registry", (ws.dir / "registry.csv").string(), "ingest", "--counts",
                                 (ws.dir / "counts.csv").string()});
  ::unsetenv(cli::store_env_var);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(ws.dir / "envstore" / "checkpoint.jsonl"));
}

TEST(Cli, ConfigFileSuppliesDefaults) {
  Workspace ws;
  fixtures::write_file(ws.dir / "counts.csv", "torrents,peers\n3,5\n");
  fixtures::write_file(ws.dir / "swarmwatch.ini", "store=" + (ws.dir / "store").string() + "\nregistry=" +
                                                      (ws.dir / "registry.csv").string() + "\n");
  auto r = swarmwatch_cli({"--config", (ws.dir / "swarmwatch.ini").string(), "ingest", "--counts",
                           (ws.dir / "counts.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = swarmwatch_cli({"--config", (ws.dir / "swarmwatch.ini").string(), "report", "swarms"});
  EXPECT_NE(r.out.find("B.S02E05,3,5,100.00"), std::string::npos) << r.out << r.err;
}

TEST(Cli, CrawlThreeVirtualCyclesAgainstMockTracker) {
  sim::PopulationSpec spec;
  spec.swarm_sizes = {12};
  const auto truth = sim::generate(spec, fixture_geo());
  VirtualClock clock(truth.start());
  sim::MockTracker mock(truth, clock);
  sim::MockTrackerServer server(mock);
  const auto magnet = "magnet:?xt=urn:btih:" + truth.swarms()[0].infohash.hex() + "&dn=sim&tr=" + server.http_announce_url();

  Workspace ws;
  auto r = swarmwatch_cli(ws.with({"crawl", magnet, "--cycles", "3", "--virtual-start", "2013-08-12T00:00:00Z"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cycles=3 results=3 overruns=0 warnings=0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("2013-08-12T00:04:00Z t4 peers=12"), std::string::npos) << r.out;
  const auto dir = ws.dir / "store" / "snapshots" / truth.swarms()[0].infohash.hex();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".xml";
  EXPECT_EQ(files, 3U);
  r = swarmwatch_cli(ws.with({"report", "activity"}));
  EXPECT_NE(r.out.find(",12,3.0"), std::string::npos) << r.out;
}

TEST(Cli, CrawlWithUnreachableTrackerWarns) {
  Workspace ws;
  const auto magnet = "magnet:?xt=urn:btih:" + hash_of(7).hex() + "&tr=http://127.0.0.1:1/announce";
  const auto r = swarmwatch_cli(ws.with({"crawl", magnet, "--cycles", "2", "--virtual-start", "2013-08-12T00:00:00Z"}));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stop=all_trackers_unreachable"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("warnings=2"), std::string::npos) << r.out;
}

TEST(Cli, BadMagnetFailsBeforeAnyCycle) {
  Workspace ws;
  const auto r = swarmwatch_cli(ws.with({"crawl", "magnet:?xt=urn:btih:nothex", "--cycles", "1"}));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(ws.dir / "store"));
  EXPECT_EQ(r.out, "");
}

TEST(Cli, SimulateDeduplicatesIntervals) {
  Workspace ws;
  fixtures::write_file(ws.dir / "pop.conf", "seed = 3\nhours = 2\nswarm_sizes = 30\n");
  const auto r = swarmwatch_cli(ws.with({"simulate", "--spec", (ws.dir / "pop.conf").string(), "--intervals",
                                         "600,600,1200", "--truth-csv", (ws.dir / "truth.csv").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("600 s listed twice"), std::string::npos) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3U) << r.out;
  EXPECT_EQ(rows[0], "interval_s,cycles,announces,observed,active,recall,precision,span_mae_s");
  EXPECT_EQ(rows[1].substr(0, 6), "600,12");
  // No churn: every peer is found at every interval.
  EXPECT_NE(rows[1].find(",1.000000,1.000000,"), std::string::npos);
  EXPECT_NE(rows[2].find(",1.000000,1.000000,"), std::string::npos);
  EXPECT_TRUE(fs::exists(ws.dir / "truth.csv"));

  fixtures::write_file(ws.dir / "bad.conf", "swarm_sizes = 100, 10\noverlap.1.2 = 0.5\n");
  EXPECT_EQ(swarmwatch_cli(ws.with({"simulate", "--spec", (ws.dir / "bad.conf").string()})).code, 1);
}
