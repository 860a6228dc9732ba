#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "swarmwatch/clock.hpp"
#include "swarmwatch/crawler.hpp"
#include "swarmwatch/snapshot.hpp"
#include "swarmwatch/torrent.hpp"

namespace swarmwatch::cli {

namespace {

bool is_magnet(std::string_view s) {
  constexpr std::string_view prefix = "magnet:";
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  return true;
}

TorrentMeta load_input(const std::string& input) {
  try {
    if (is_magnet(input)) return parse_magnet(input);
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read torrent file '{}'", input));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_torrent(ss.str());
  } catch (const TorrentError& e) {
    throw ConfigError(fmt::format("'{}': {}", input, e.what()));
  } catch (const bencode::Error& e) {
    throw ConfigError(fmt::format("'{}': {}", input, e.what()));
  }
}

} // namespace

int cmd_crawl(const RunConfig& config, const CrawlArgs& args, Io io) {
  // Everything that can be wrong with the inputs is checked before the first cycle.
  std::vector<TorrentMeta> metas;
  for (const auto& input : args.inputs) {
    auto meta = load_input(input);
    if (meta.announce_urls.empty()) throw ConfigError(fmt::format("'{}' names no tracker", input));
    metas.push_back(std::move(meta));
  }
  if (args.duration.has_value() == args.cycles.has_value())
    throw ConfigError("crawl needs exactly one of --duration and --cycles");
  std::optional<Seconds> duration;
  if (args.duration) {
    duration = parse_duration(*args.duration);
    if (!duration) throw ConfigError(fmt::format("bad --duration '{}'", *args.duration));
  }
  if (args.cycles && *args.cycles == 0) throw ConfigError("--cycles must be positive");
  std::optional<Instant> virtual_start;
  if (args.virtual_start) {
    virtual_start = parse_iso8601(*args.virtual_start);
    if (!virtual_start) throw ConfigError(fmt::format("bad --virtual-start '{}'", *args.virtual_start));
  }
  if (args.udp_timeouts_s.empty()) throw ConfigError("--udp-timeouts needs at least one value");
  for (double t : args.udp_timeouts_s)
    if (!(t > 0)) throw ConfigError("--udp-timeouts must be positive");

  const auto geo = load_geo(config);
  auto store = open_store(config);
  std::vector<TorrentInfo> infos;
  for (const auto& m : metas) {
    TorrentInfo info;
    info.infohash = m.infohash;
    info.name = m.name;
    info.size = m.total_size;
    infos.push_back(std::move(info));
  }
  const auto ids = store->register_torrents(infos);
  const auto snapshot_dir = args.snapshot_dir.value_or(*config.store / "snapshots");

  std::vector<crawler::CrawlJob> jobs;
  for (std::size_t i = 0; i < metas.size(); ++i) {
    crawler::CrawlJob job;
    job.torrent = metas[i];
    job.torrent_id = ids[i];
    job.trackers = metas[i].announce_urls;
    job.cycle_interval = config.interval;
    jobs.push_back(std::move(job));
  }

  tracker::ClientOptions client_options;
  client_options.udp_timeouts.clear();
  for (double t : args.udp_timeouts_s)
    client_options.udp_timeouts.emplace_back(static_cast<std::int64_t>(std::llround(t * 1000.0)));
  const tracker::TrackerClient client(tracker::make_http_transport(), tracker::make_udp_transport(), client_options);

  SystemClock system_clock;
  std::optional<VirtualClock> virtual_clock;
  if (virtual_start) virtual_clock.emplace(*virtual_start);
  Clock& clock = virtual_clock ? static_cast<Clock&>(*virtual_clock) : system_clock;

  crawler::EnumerationOptions options;
  options.saturation_rounds = config.saturation;
  options.round_budget = config.budget;
  options.numwant = config.numwant;
  const auto now = clock.now();
  const crawler::Enumerator enumerator(
      client, clock, options,
      tracker::make_crawler_peer_id(static_cast<std::uint64_t>(now.time_since_epoch().count())));
  const Instant stop_at =
      duration ? now + *duration : now + config.interval * static_cast<std::int64_t>(*args.cycles);

  std::size_t warnings = 0;
  const auto stats = crawler::run_schedule(
      jobs, stop_at, enumerator, clock,
      [&](const crawler::CrawlCycleResult& r) {
        warnings += r.errors.size();
        const auto snapshot = crawler::make_snapshot(r, geo);
        try {
          crawler::write_snapshot(snapshot_dir, snapshot);
          store->ingest_snapshot(crawler::render_snapshot_xml(snapshot), geo);
        } catch (const std::exception& e) {
          ++warnings;
          io.err << "warning: " << e.what() << '\n';
        }
        io.out << fmt::format("{} t{} peers={} rounds={} stop={} seeders={} leechers={}{}\n",
                              format_iso8601(r.started_at), r.torrent_id, r.peers.size(), r.announce_rounds,
                              crawler::stop_rule_name(r.stop), r.seeders, r.leechers,
                              r.errors.empty() ? "" : fmt::format(" errors={}", r.errors.size()));
        for (const auto& e : r.errors) io.err << fmt::format("warning: t{}: {}\n", r.torrent_id, e);
      },
      {.parallel_jobs = args.parallel});
  store->checkpoint();
  io.out << fmt::format("cycles={} results={} overruns={} warnings={}\n", stats.cycles, stats.results,
                        stats.overruns, warnings);
  if (warnings > 0) io.err << fmt::format("warning: {} tracker or storage problems, see above\n", warnings);
  return 0;
}

} // namespace swarmwatch::cli
