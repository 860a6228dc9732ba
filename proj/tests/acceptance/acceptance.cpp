// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "swarmwatch/analytics.hpp"
#include "swarmwatch/bencode.hpp"
#include "swarmwatch/cli.hpp"
#include "swarmwatch/digest.hpp"
#include "swarmwatch/sim.hpp"
#include "swarmwatch/torrent.hpp"
#include "swarmwatch/tracker_wire.hpp"
#include "test_support.hpp"

using namespace swarmwatch;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const geodb::GeoTable& fixture_geo() {
  static const auto geo = geodb::GeoTable::load(fixtures::data_file("geo_fixture.csv"));
  return geo;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarmwatch");
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// ---- published tables ----

struct PublishedRow {
  std::string label;
  std::uint64_t distinct;
  double pct;
};

const std::vector<PublishedRow> published_swarms{
    {"Breaking.Bad.S05E09.HDTV.x264-ASAP.mp4", 1648666, 26.17},
    {"Breaking.Bad.S05E09.720p.HDTV.x264-IMMERSE[rarbg]", 347814, 5.52},
    {"Dexter S08E07 HDTV x264-ASAP[ettv]", 983860, 15.62},
    {"Dexter.S08E07.720p.HDTV.x264-IMMERSE.mkv", 311144, 4.94},
    {"True.Blood.S06E09.HDTV.x264-EVOLVE.mp4", 903936, 14.35},
    {"True Blood S06E09 Life Matters WEB DL XviD-FUM[ettv]", 206774, 3.28},
};

const std::vector<PublishedRow> published_episodes{
    {"Breaking Bad S05E09", 1954961, 31.03}, {"Breaking Bad S05E10", 1943499, 30.85},
    {"Dexter S08E07", 1280094, 20.32},       {"Dexter S08E08", 1388402, 22.04},
    {"True Blood S06E09", 1089996, 17.30},   {"True Blood S06E10", 974839, 15.47},
};

constexpr std::uint64_t published_total = 6299695;

// Twelve torrents, two per episode. Ids 1,2 / 5,6 / 9,10 are the published
// swarms; the second-week torrents have made-up sizes.
TorrentRegistry twelve_torrents() {
  struct Row {
    const char* name;
    const char* show;
    int season, episode;
  };
  const Row rows[] = {
      {"Breaking.Bad.S05E09.HDTV.x264-ASAP.mp4", "Breaking Bad", 5, 9},
      {"Breaking.Bad.S05E09.720p.HDTV.x264-IMMERSE[rarbg]", "Breaking Bad", 5, 9},
      {"Breaking.Bad.S05E10.HDTV.x264-ASAP.mp4", "Breaking Bad", 5, 10},
      {"Breaking.Bad.S05E10.720p.HDTV.x264-IMMERSE[rarbg]", "Breaking Bad", 5, 10},
      {"Dexter S08E07 HDTV x264-ASAP[ettv]", "Dexter", 8, 7},
      {"Dexter.S08E07.720p.HDTV.x264-IMMERSE.mkv", "Dexter", 8, 7},
      {"Dexter S08E08 HDTV x264-ASAP[ettv]", "Dexter", 8, 8},
      {"Dexter.S08E08.720p.HDTV.x264-IMMERSE.mkv", "Dexter", 8, 8},
      {"True.Blood.S06E09.HDTV.x264-EVOLVE.mp4", "True Blood", 6, 9},
      {"True Blood S06E09 Life Matters WEB DL XviD-FUM[ettv]", "True Blood", 6, 9},
      {"True.Blood.S06E10.HDTV.x264-EVOLVE.mp4", "True Blood", 6, 10},
      {"True Blood S06E10 WEB DL XviD-FUM[ettv]", "True Blood", 6, 10},
  };
  TorrentRegistry reg;
  std::uint32_t id = 1;
  for (const auto& r : rows) {
    reg.add({id, sha1(r.name), r.name, 0, r.show, r.season, r.episode, ""});
    ++id;
  }
  return reg;
}

// Peer counts per exact torrent set. Each published pair overlaps by
// |A| + |B| - |A u B|; four blocks of peers shared across episodes bring
// the sum of episode unions down to the published global total.
std::vector<std::pair<std::vector<std::uint32_t>, std::uint64_t>> twelve_torrent_counts() {
  const std::uint64_t bb = 1648666 + 347814 - 1954961;
  const std::uint64_t dx = 983860 + 311144 - 1280094;
  const std::uint64_t tb = 903936 + 206774 - 1089996;
  const std::uint64_t x1 = 900000, x2 = 700000, x3 = 500000;
  const std::uint64_t x4 = 8631791 - published_total - x1 - x2 - x3;
  return {
      {{1}, 1648666 - bb - x1}, {{2}, 347814 - bb - x4}, {{1, 2}, bb},     {{1, 3}, x1},
      {{3}, 1943499 - 443499 - x1}, {{4}, 443499},
      {{5}, 983860 - dx - x2},  {{6}, 311144 - dx - x4}, {{5, 6}, dx},     {{5, 7}, x2},
      {{7}, 1388402 - 388402 - x2}, {{8}, 388402},       {{2, 6}, x4},
      {{9}, 903936 - tb - x3},  {{10}, 206774 - tb},     {{9, 10}, tb},    {{9, 11}, x3},
      {{11}, 974839 - 274839 - x3}, {{12}, 274839},
  };
}

RegionHistogram histogram_of(const std::vector<std::pair<std::vector<std::uint32_t>, std::uint64_t>>& counts) {
  RegionHistogram h;
  for (const auto& [ids, n] : counts) h.add(Membership::of(ids), n);
  return h;
}

// ---- criteria ----

Outcome percentage_reproduction() {
  fixtures::TempDir dir;
  const auto reg = twelve_torrents();
  fixtures::write_file(dir / "registry.csv", reg.to_csv());
  std::string counts = "torrents,peers\n";
  for (const auto& [ids, n] : twelve_torrent_counts()) {
    std::string joined;
    for (auto id : ids) joined += (joined.empty() ? "" : " ") + std::to_string(id);
    counts += joined + "," + std::to_string(n) + "\n";
  }
  fixtures::write_file(dir / "counts.csv", counts);
  const std::vector<std::string> base{"--store", (dir / "store").string(), "--registry", (dir / "registry.csv").string()};
  auto with = [&](std::vector<std::string> rest) {
    auto a = base;
    a.insert(a.end(), rest.begin(), rest.end());
    return a;
  };

  const auto t0 = Clock::now();
  const auto ingest = run_cli(with({"ingest", "--counts", (dir / "counts.csv").string()}));
  const auto swarms = run_cli(with({"report", "swarms"}));
  const auto episodes = run_cli(with({"report", "episodes"}));
  const double elapsed = seconds_since(t0);
  if (ingest.code != 0 || swarms.code != 0 || episodes.code != 0)
    return {false, "cli failed: " + ingest.err + swarms.err + episodes.err};

  // label -> (distinct, pct)
  auto parse = [](const std::string& csv) {
    std::map<std::string, std::pair<std::uint64_t, double>> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto f = split(line, ',');
      if (f.size() != 4) continue;
      rows[f[0]] = {std::stoull(f[2]), std::stod(f[3])};
    }
    return rows;
  };
  const auto got_swarms = parse(swarms.out);
  const auto got_episodes = parse(episodes.out);
  int matched = 0;
  double worst = 0.0;
  std::string bad;
  auto check = [&](const std::map<std::string, std::pair<std::uint64_t, double>>& got,
                   const std::vector<PublishedRow>& want) {
    for (const auto& w : want) {
      const auto it = got.find(w.label);
      if (it == got.end()) {
        bad += " missing '" + w.label + "'";
        continue;
      }
      const double diff = std::abs(it->second.second - w.pct);
      worst = std::max(worst, diff);
      if (it->second.first == w.distinct && diff <= 0.01 + 1e-9)
        ++matched;
      else
        bad += fmt::format(" {}={}/{:.2f}", w.label, it->second.first, it->second.second);
    }
  };
  check(got_swarms, published_swarms);
  check(got_episodes, published_episodes);
  const bool pass = matched == 12 && elapsed < 1.0;
  return {pass, fmt::format("{}/12 percentages within 0.01 pp (worst {:.4f}), {:.3f} s{}", matched, worst, elapsed, bad)};
}

Outcome activity_arithmetic() {
  const auto t0 = Clock::now();
  const auto a = analytics::activity_stats(1272194701ULL, published_total, 120s);
  const double elapsed = seconds_since(t0);
  const double hours = a.est_avg_activity.count() / 3600.0;
  const bool pass = a.avg_hits_per_ip >= 201.9 && a.avg_hits_per_ip <= 202.0 && hours >= 6.7 && hours <= 6.8 &&
                    elapsed < 1.0;
  return {pass, fmt::format("avg_hits_per_ip={:.4f} est_avg_activity={:.4f} h, {:.6f} s", a.avg_hits_per_ip, hours,
                            elapsed)};
}

Outcome inclusion_exclusion() {
  const auto reg = twelve_torrents();
  PeerStore store(reg);
  store.import_counts(histogram_of(twelve_torrent_counts()));

  struct Pair {
    std::uint32_t a, b;
    std::size_t swarm_a, swarm_b, episode;
  };
  const Pair pairs[] = {{1, 2, 0, 1, 0}, {5, 6, 2, 3, 2}, {9, 10, 4, 5, 4}};
  std::string detail;
  bool pass = store.distinct_peers() == published_total;
  for (const auto& p : pairs) {
    const auto implied = published_swarms[p.swarm_a].distinct + published_swarms[p.swarm_b].distinct -
                         published_episodes[p.episode].distinct;
    const std::vector<std::uint32_t> ids{p.a, p.b};
    const auto inter = store.distinct_count(ids, SetMode::intersection);
    const std::vector<analytics::Selector> sel{{"a", {p.a}}, {"b", {p.b}}};
    const auto venn = analytics::cross_participation(sel, store);
    pass = pass && inter == implied && venn.pairs.at(0).intersection == implied &&
           store.distinct_count(ids, SetMode::union_) == published_episodes[p.episode].distinct;
    detail += fmt::format("{} overlap implied={} engine={} venn={}; ", published_episodes[p.episode].label, implied,
                          inter, venn.pairs.at(0).intersection);
  }
  const auto episodes = analytics::episode_table(store);
  for (std::size_t i = 0; i < episodes.rows.size(); ++i)
    pass = pass && i < published_episodes.size() && episodes.rows[i].distinct_ips == published_episodes[i].distinct;
  detail += fmt::format("global={}", store.distinct_peers());
  return {pass, detail};
}

Outcome set_oracle() {
  std::mt19937_64 rng(20130812);
  const auto t0 = Clock::now();
  std::size_t populations = 0, checks = 0, mismatches = 0;
  for (; populations < 200; ++populations) {
    const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng() % 4);
    const std::size_t n = rng() % 1001;
    TorrentRegistry reg;
    for (std::uint32_t id = 1; id <= k; ++id) reg.add({id, sha1(fmt::format("pop{}-{}", populations, id)), "t", 0, "", 0, 0, ""});
    PeerStore store(reg);

    std::vector<PeerRecord> peers;
    std::vector<std::set<std::uint32_t>> sets(k + 1);
    std::set<std::uint32_t> used;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t ip;
      do ip = static_cast<std::uint32_t>(rng());
      while (!used.insert(ip).second);
      unsigned bits = 0;
      while (bits == 0) bits = static_cast<unsigned>(rng() % (1U << k));
      PeerRecord p;
      p.ip = Ipv4{ip};
      for (std::uint32_t id = 1; id <= k; ++id)
        if (bits & (1U << (id - 1))) {
          p.membership.set(id);
          sets[id].insert(ip);
        }
      peers.push_back(std::move(p));
    }
    store.import_peers(peers);

    // Every nonempty selector in every mode.
    for (unsigned sel = 1; sel < (1U << k); ++sel) {
      std::vector<std::uint32_t> ids;
      for (std::uint32_t id = 1; id <= k; ++id)
        if (sel & (1U << (id - 1))) ids.push_back(id);
      std::uint64_t any = 0, all = 0, exact = 0;
      for (auto ip : used) {
        bool has_any = false, has_all = true, outside = false;
        for (std::uint32_t id = 1; id <= k; ++id) {
          const bool in = sets[id].count(ip) > 0;
          const bool selected = (sel & (1U << (id - 1))) != 0;
          if (selected) {
            has_any = has_any || in;
            has_all = has_all && in;
          } else if (in) {
            outside = true;
          }
        }
        any += has_any;
        all += has_all;
        exact += has_all && !outside;
      }
      checks += 3;
      mismatches += store.distinct_count(ids, SetMode::union_) != any;
      mismatches += store.distinct_count(ids, SetMode::intersection) != all;
      mismatches += store.distinct_count(ids, SetMode::exact) != exact;
    }

    // Venn over 2 or 3 random selectors, possibly sharing torrents.
    if (k >= 2) {
      const std::size_t m = 2 + rng() % 2;
      std::vector<analytics::Selector> selectors;
      std::vector<std::set<std::uint32_t>> members(m);
      for (std::size_t s = 0; s < m; ++s) {
        analytics::Selector sel{fmt::format("s{}", s), {}};
        while (sel.ids.empty())
          for (std::uint32_t id = 1; id <= k; ++id)
            if (rng() % 2) sel.ids.push_back(id);
        for (auto id : sel.ids) members[s].insert(sets[id].begin(), sets[id].end());
        selectors.push_back(std::move(sel));
      }
      std::map<unsigned, std::uint64_t> regions;
      std::uint64_t union_count = 0;
      for (auto ip : used) {
        unsigned mask = 0;
        for (std::size_t s = 0; s < m; ++s)
          if (members[s].count(ip)) mask |= 1U << s;
        if (mask != 0) {
          ++regions[mask];
          ++union_count;
        }
      }
      const auto venn = analytics::cross_participation(selectors, store);
      ++checks;
      mismatches += venn.union_count != union_count;
      mismatches += venn.regions.size() != (1U << m) - 1;
      for (const auto& r : venn.regions) {
        ++checks;
        mismatches += r.count != (regions.count(r.mask) ? regions.at(r.mask) : 0);
      }
      for (std::size_t s = 0; s < m; ++s) {
        ++checks;
        mismatches += venn.set_sizes.at(s) != members[s].size();
      }
      for (const auto& pr : venn.pairs) {
        std::uint64_t inter = 0;
        for (auto ip : members[pr.a]) inter += members[pr.b].count(ip);
        ++checks;
        mismatches += pr.intersection != inter;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 60.0,
          fmt::format("{} populations, {} comparisons, {} mismatches, {:.2f} s", populations, checks, mismatches,
                      elapsed)};
}

// Independent of the library: keys sorted with std::string's byte order.
std::string reference_encode(const bencode::Value& v) {
  if (v.is_integer()) return "i" + std::to_string(v.as_integer()) + "e";
  if (v.is_bytes()) return std::to_string(v.as_bytes().size()) + ":" + v.as_bytes();
  if (v.is_list()) {
    std::string s = "l";
    for (const auto& x : v.as_list()) s += reference_encode(x);
    return s + "e";
  }
  auto items = v.as_dict();
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string s = "d";
  for (const auto& [key, x] : items) s += std::to_string(key.size()) + ":" + key + reference_encode(x);
  return s + "e";
}

bencode::Value random_value(std::mt19937_64& rng, int depth) {
  switch (rng() % (depth > 3 ? 2 : 4)) {
  case 0: {
    std::uniform_int_distribution<bencode::Integer> any(std::numeric_limits<bencode::Integer>::min(),
                                                        std::numeric_limits<bencode::Integer>::max());
    return bencode::Value(rng() % 2 ? any(rng) : static_cast<bencode::Integer>(rng() % 2001) - 1000);
  }
  case 1: {
    std::string s(rng() % 24, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    return bencode::Value(std::move(s));
  }
  case 2: {
    bencode::List l;
    for (std::size_t i = rng() % 5; i > 0; --i) l.push_back(random_value(rng, depth + 1));
    return bencode::Value(std::move(l));
  }
  default: {
    bencode::Dict d;
    std::set<std::string> keys;
    for (std::size_t i = rng() % 5; i > 0; --i) {
      std::string key(rng() % 6, '\0');
      for (auto& c : key) c = static_cast<char>(rng() % 256);
      if (keys.insert(key).second) d.emplace_back(key, random_value(rng, depth + 1));
    }
    return bencode::Value(std::move(d));
  }
  }
}

Outcome codec_properties() {
  std::mt19937_64 rng(7);
  int round_trips = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto v = random_value(rng, 0);
    const auto bytes = bencode::encode(v);
    if (bytes == reference_encode(v) && bencode::decode(bytes) == v && bencode::encode(bencode::decode(bytes)) == bytes)
      ++round_trips;
  }

  const std::vector<std::pair<std::string, bencode::Errc>> malformed{
      {"i03e", bencode::Errc::malformed_input},   {"i-0e", bencode::Errc::malformed_input},
      {"ie", bencode::Errc::malformed_input},     {"i-e", bencode::Errc::malformed_input},
      {"i12", bencode::Errc::malformed_input},    {"i9223372036854775808e", bencode::Errc::malformed_input},
      {"i1.5e", bencode::Errc::malformed_input},  {"5:abc", bencode::Errc::malformed_input},
      {"03:abc", bencode::Errc::malformed_input}, {"-1:a", bencode::Errc::malformed_input},
      {"l", bencode::Errc::malformed_input},      {"d1:a", bencode::Errc::malformed_input},
      {"di1ei2ee", bencode::Errc::malformed_input}, {"d1:bi1e1:ai2ee", bencode::Errc::malformed_input},
      {"d1:ai1e1:ai2ee", bencode::Errc::duplicate_key}, {"i1ei2e", bencode::Errc::trailing_bytes},
      {"", bencode::Errc::malformed_input},       {"x", bencode::Errc::malformed_input},
  };
  std::size_t rejected = 0;
  for (const auto& [input, code] : malformed) {
    try {
      bencode::decode(input);
    } catch (const bencode::Error& e) {
      rejected += e.code() == code;
    }
  }

  // Digest computed with Python hashlib over the bencoded info dictionary.
  const auto meta = parse_torrent(fixtures::read_file(fixtures::test_data("breaking_bad_s05e09.torrent")));
  const bool hash_ok = meta.infohash.hex() == "6df633d16db2663535a3956973907170ee61ab5b";

  return {round_trips == 10000 && rejected == malformed.size() && hash_ok,
          fmt::format("{}/10000 round-trips, {}/{} malformed classes rejected, fixture infohash {}", round_trips,
                      rejected, malformed.size(), meta.infohash.hex())};
}

Outcome wire_conformance() {
  sim::PopulationSpec spec;
  spec.seed = 19;
  spec.swarm_sizes = {150, 90};
  spec.mix = {0.5, 0.3, 0.2, 0.0};
  const auto truth = sim::generate(spec, fixture_geo());
  VirtualClock clock(truth.start() + 3600s);
  sim::MockTrackerOptions mo;
  mo.max_peers = 1000;
  sim::MockTracker mock(truth, clock, mo);
  sim::MockTrackerServer server(mock);
  tracker::ClientOptions co;
  co.udp_timeouts = {2000ms, 4000ms};
  const tracker::TrackerClient client(tracker::make_http_transport(), tracker::make_udp_transport(), co);

  std::size_t exact = 0, attempts = 0;
  for (const auto& swarm : truth.swarms()) {
    std::set<Endpoint> want;
    for (auto i : truth.online_in(swarm.id, clock.now())) want.insert(truth.peers()[i].endpoint);
    for (const auto& url : {server.http_announce_url(), server.udp_announce_url()}) {
      tracker::AnnounceRequest req;
      req.infohash = swarm.infohash;
      req.peer_id = tracker::make_crawler_peer_id(1);
      req.numwant = 500;
      const auto resp = client.announce(url, req);
      const std::set<Endpoint> got(resp.peers.begin(), resp.peers.end());
      ++attempts;
      exact += got == want && resp.peers.size() == want.size();
    }
  }

  std::mt19937_64 rng(3);
  int identical = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string blob((rng() % 100) * 6, '\0');
    for (auto& c : blob) c = static_cast<char>(rng() % 256);
    identical += tracker::compact_peers(tracker::parse_compact_peers(blob)) == blob;
  }
  return {exact == attempts && identical == 1000,
          fmt::format("{}/{} announces returned the exact online set over HTTP and UDP, {}/1000 compact blobs "
                      "byte-identical",
                      exact, attempts, identical)};
}

Outcome enumeration_recall() {
  // Every peer stays online, so every peer is online for the full cycle.
  sim::PopulationSpec spec;
  spec.seed = 23;
  spec.swarm_sizes = {500};
  spec.mix = {0.4, 0.3, 0.2, 0.1};
  const auto truth = sim::generate(spec, fixture_geo());

  crawler::EnumerationOptions eo;
  eo.numwant = 25;
  eo.saturation_rounds = 12;
  eo.round_budget = 500;
  sim::MockTrackerOptions mo;
  mo.max_peers = 25;

  VirtualClock clock(truth.start());
  sim::MockTracker mock(truth, clock, mo);
  auto loop = std::make_shared<sim::LoopbackTransport>(mock);
  tracker::ClientOptions co;
  co.udp_timeouts = {1ms};
  const tracker::TrackerClient client(loop, loop, co);
  const crawler::Enumerator enumerator(client, clock, eo, tracker::make_crawler_peer_id(4));
  const auto job = truth.jobs("http://tracker.sim/announce", 120s).at(0);

  std::uint64_t found = 0, expected = 0;
  double worst = 1.0;
  int rounds = 0;
  constexpr int cycles = 20;
  for (int c = 0; c < cycles; ++c) {
    clock.sleep_until(truth.start() + 120s * c);
    const auto r = enumerator.enumerate(job);
    std::size_t hits = 0;
    for (const auto& p : truth.peers()) hits += r.peers.count(p.endpoint);
    found += hits;
    expected += truth.peers().size();
    worst = std::min(worst, static_cast<double>(hits) / static_cast<double>(truth.peers().size()));
    rounds += r.announce_rounds;
  }
  const double recall = static_cast<double>(found) / static_cast<double>(expected);

  // A month of 120 s cycles with the same sampling, end to end into a store.
  auto month = spec;
  month.duration = Seconds{30 * 86400};
  month.diurnal = {0.2, 0.7, 20.5, 1.0};
  const auto month_truth = sim::generate(month, fixture_geo());
  sim::CrawlSimOptions so;
  so.interval = 120s;
  so.enumeration = eo;
  so.tracker = mo;
  const auto t0 = Clock::now();
  const auto run = sim::crawl_truth(month_truth, fixture_geo(), so);
  const double elapsed = seconds_since(t0);

  return {recall >= 0.99 && run.schedule.cycles == 21600 && elapsed < 300.0,
          fmt::format("recall {:.4f} over {} cycles (worst cycle {:.4f}, {:.1f} rounds/cycle); month: {} cycles, {} "
                      "announces in {:.1f} s",
                      recall, cycles, worst, static_cast<double>(rounds) / cycles, run.schedule.cycles, run.announces,
                      elapsed)};
}

Outcome crawl_frequency_monotonicity() {
  fixtures::TempDir dir;
  fixtures::write_file(dir / "churny.conf", "seed = 31\n"
                                            "hours = 24\n"
                                            "swarm_sizes = 150, 120\n"
                                            "mix.europe = 0.5\n"
                                            "mix.north_america = 0.3\n"
                                            "mix.australia = 0.2\n"
                                            "mix.other = 0\n"
                                            "churn_rate = 0.6\n"
                                            "session.mean_minutes = 20\n");
  const auto r = run_cli({"--geo", fixtures::data_file("geo_fixture.csv").string(), "simulate", "--spec",
                          (dir / "churny.conf").string(), "--intervals", "120,600,3600"});
  if (r.code != 0) return {false, "simulate failed: " + r.err};
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<std::string, double>> recall;
  while (std::getline(in, line)) {
    const auto f = split(line, ',');
    if (f.size() >= 6) recall.emplace_back(f[0], std::stod(f[5]));
  }
  bool pass = recall.size() == 3;
  std::string detail;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    if (i > 0) pass = pass && recall[i].second <= recall[i - 1].second;
    detail += fmt::format("{}s:{:.6f} ", recall[i].first, recall[i].second);
  }
  return {pass, "recall " + detail};
}

Outcome temporal_structure() {
  auto spec = sim::PopulationSpec::parse(R"(
seed = 42
start = 2013-08-12T00:00:00Z
days = 3
swarm_sizes = 3000
mix.europe = 0.4
mix.north_america = 0.35
mix.australia = 0.25
mix.other = 0
diurnal.floor = 0.1
diurnal.amplitude = 0.8
diurnal.peak_hour = 20.5
diurnal.sharpness = 4
)");
  const auto truth = sim::generate(spec, fixture_geo());
  sim::CrawlSimOptions so;
  so.interval = 120s;
  so.enumeration.numwant = 5000;
  so.tracker.max_peers = 5000;
  const auto run = sim::crawl_truth(truth, fixture_geo(), so);
  const auto series = analytics::timeseries(*run.store, std::nullopt, analytics::Window{truth.start(), truth.end()});
  const auto peaks = analytics::detect_peaks(series);

  // Expected UTC instants of 20:30 local in each region, per day.
  const int days = static_cast<int>(spec.duration / 24h);
  bool pass = true;
  std::string detail;
  for (int d = 0; d < days; ++d) {
    const Instant day = truth.start() + 24h * d;
    std::vector<const analytics::Peak*> in_day;
    for (const auto& p : peaks)
      if (p.time >= day && p.time < day + 24h) in_day.push_back(&p);
    std::size_t matched = 0;
    for (std::size_t r = 0; r < 3; ++r) {
      const auto offset = std::chrono::duration_cast<Seconds>(std::chrono::duration<double, std::ratio<3600>>(
          spec.utc_offset_hours[r]));
      auto target = day + 20h + 30min - offset;
      if (target < day) target += 24h;
      if (target >= day + 24h) target -= 24h;
      for (const auto* p : in_day)
        if (std::chrono::abs(p->time - target) <= series.width) {
          ++matched;
          break;
        }
    }
    pass = pass && in_day.size() == 3 && matched == 3;
    detail += fmt::format("day {}: {} peaks, {}/3 within one bucket [", d + 1, in_day.size(), matched);
    for (const auto* p : in_day) detail += format_iso8601(p->time).substr(11, 5) + " ";
    detail += "UTC] ";
  }
  return {pass, detail};
}

Outcome geo_oracle() {
  std::mt19937_64 rng(1000);
  std::set<std::uint32_t> bounds;
  while (bounds.size() < 20000) bounds.insert(static_cast<std::uint32_t>(rng()));
  const std::vector<std::uint32_t> b(bounds.begin(), bounds.end());
  const char* countries[] = {"GR", "GB", "US", "AU", "IN", "CA", "PK", "DE"};
  std::vector<geodb::GeoRecord> records;
  for (std::size_t i = 0; i + 1 < b.size(); i += 2) {
    geodb::GeoRecord r;
    r.range_start = b[i];
    r.range_end = b[i + 1];
    r.country = countries[rng() % 8];
    r.city = fmt::format("city{}", i / 2);
    records.push_back(r);
  }
  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto table = geodb::GeoTable::from_records(shuffled);

  auto bogon = [](std::uint32_t ip) {
    const std::uint32_t a = ip >> 24, b2 = (ip >> 16) & 0xFF;
    return a == 0 || a == 10 || a == 127 || (a == 172 && b2 >= 16 && b2 <= 31) || (a == 192 && b2 == 168) ||
           (a >= 224 && a <= 239);
  };
  std::size_t agree = 0, hits = 0;
  for (int i = 0; i < 1000; ++i) {
    std::uint32_t ip;
    if (i % 2 == 0) {
      const auto& r = records[rng() % records.size()];
      ip = r.range_start + static_cast<std::uint32_t>(rng() % (std::uint64_t{r.range_end} - r.range_start + 1));
    } else {
      ip = static_cast<std::uint32_t>(rng());
    }
    const geodb::GeoRecord* want = nullptr;
    if (!bogon(ip))
      for (const auto& r : records)
        if (r.range_start <= ip && ip <= r.range_end) want = &r;
    const auto* got = table.lookup(Ipv4{ip});
    const bool same = (want == nullptr && got == nullptr) ||
                      (want != nullptr && got != nullptr && want->range_start == got->range_start &&
                       want->range_end == got->range_end && want->city == got->city);
    agree += same;
    hits += want != nullptr;
  }

  const std::vector<std::tuple<std::string, std::string, std::uint64_t>> cities{
      {"GR", "Athens", 92866},   {"GB", "London", 65203},   {"AU", "Perth", 53386},     {"AU", "Brisbane", 49144},
      {"IN", "Mumbai", 48027},   {"CA", "Toronto", 45828},  {"AU", "Sydney", 42899},    {"PK", "Islamabad", 41850},
      {"AU", "Melbourne", 38469}, {"IN", "Delhi", 38432}};
  std::vector<PeerRecord> peers;
  std::uint32_t ip = 1;
  for (auto it = cities.rbegin(); it != cities.rend(); ++it)
    for (std::uint64_t i = 0; i < std::get<2>(*it); ++i) {
      PeerRecord p;
      p.ip = Ipv4{ip++};
      p.country = std::get<0>(*it);
      p.city = std::get<1>(*it);
      peers.push_back(std::move(p));
    }
  const auto top = analytics::geo_top(peers, analytics::GeoLevel::city, 10);
  bool order = top.rows.size() == cities.size();
  for (std::size_t i = 0; order && i < cities.size(); ++i)
    order = top.rows[i].value == std::get<1>(cities[i]) && top.rows[i].count == std::get<2>(cities[i]);
  const bool athens = !top.rows.empty() && top.rows[0].label == "Athens, Greece" && top.rows[0].count == 92866;

  return {agree == 1000 && table.size() == 10000 && athens && order,
          fmt::format("{}/1000 lookups equal the linear scan ({} resolved) on {} rows; first city '{}' {}; top ten "
                      "order {}",
                      agree, hits, table.size(), top.rows.empty() ? "" : top.rows[0].label,
                      top.rows.empty() ? 0 : top.rows[0].count, order ? "matches" : "differs")};
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"percentage-reproduction", percentage_reproduction},
      {"activity-arithmetic", activity_arithmetic},
      {"inclusion-exclusion", inclusion_exclusion},
      {"set-oracle", set_oracle},
      {"codec-properties", codec_properties},
      {"wire-conformance", wire_conformance},
      {"enumeration-recall", enumeration_recall},
      {"crawl-frequency-monotonicity", crawl_frequency_monotonicity},
      {"temporal-structure", temporal_structure},
      {"geo-oracle", geo_oracle},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
