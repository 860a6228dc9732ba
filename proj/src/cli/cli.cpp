#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "swarmwatch/analytics.hpp"

namespace swarmwatch::cli {

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tracker-based BitTorrent swarm crawler and cross-swarm analytics"};
  app.name(args.empty() ? "swarmwatch" : args.front());
  app.set_config("--config", "", "INI/TOML file with option defaults; flags override it");
  app.require_subcommand(1);

  RunConfig config;
  std::int64_t interval_s = 120;
  app.add_option("--store", config.store, "Peer store directory")->envname(store_env_var);
  app.add_option("--geo", config.geo, "Geolocation range table (CSV)");
  app.add_option("--registry", config.registry, "Torrent registry with show/episode labels (CSV)");
  app.add_option("--interval", interval_s, "Crawl cycle interval in seconds")->capture_default_str();
  app.add_option("--saturation", config.saturation, "Consecutive rounds without new IPs that end a cycle")
      ->capture_default_str();
  app.add_option("--budget", config.budget, "Most announce rounds per cycle")->capture_default_str();
  app.add_option("--numwant", config.numwant, "Peers asked for per announce")->capture_default_str();
  app.add_option("--out", config.output, "Write output to this file instead of stdout");
  app.add_flag("--json", config.json, "Line-delimited JSON instead of CSV");

  CrawlArgs crawl;
  auto* crawl_cmd = app.add_subcommand("crawl", "Crawl swarms from .torrent files or magnet links");
  crawl_cmd->add_option("inputs", crawl.inputs, "Torrent files or magnet URIs")->required();
  crawl_cmd->add_option("--duration", crawl.duration, "How long to crawl: 90s, 15m, 2h, 3d");
  crawl_cmd->add_option("--cycles", crawl.cycles, "Number of crawl cycles instead of a duration");
  crawl_cmd->add_option("--virtual-start", crawl.virtual_start,
                        "Run on a virtual clock starting at this UTC instant (for mock trackers)");
  crawl_cmd->add_option("--snapshots", crawl.snapshot_dir, "Snapshot directory (default <store>/snapshots)");
  crawl_cmd->add_option("--udp-timeouts", crawl.udp_timeouts_s, "Per-attempt UDP timeouts in seconds")
      ->delimiter(',');
  crawl_cmd->add_flag("--parallel", crawl.parallel, "Crawl the torrents of a cycle concurrently");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load snapshot files into the store");
  ingest_cmd->add_option("paths", ingest.paths, "Snapshot files or directories");
  ingest_cmd->add_flag("--regeolocate", ingest.regeolocate, "Re-resolve every stored peer against --geo");
  ingest_cmd->add_option("--counts", ingest.counts,
                         "CSV torrents,peers of peer counts per exact torrent set, e.g. \"1 2,41519\"");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Print a report: swarms, episodes, venn, geo, timeseries, "
                                                  "peaks, activity, sessions");
  report_cmd->add_option("kind", report.kind, "Report name")->required();
  report_cmd->add_option("selectors", report.selectors,
                         "venn: 2 or 3 selectors, each ids (1,2), a label, or NAME=ids|label");
  report_cmd->add_option("--level", report.level, "geo: country, state, city or isp")->capture_default_str();
  report_cmd->add_option("--n", report.n, "geo: number of rows")->capture_default_str();
  report_cmd->add_option("--scope", report.scope, "geo: restrict to one country code");
  report_cmd->add_option("--torrent", report.torrent, "timeseries/peaks: one torrent id (default all)");
  report_cmd->add_option("--from", report.from, "timeseries/peaks: window start, UTC");
  report_cmd->add_option("--to", report.to, "timeseries/peaks: window end (exclusive), UTC");
  report_cmd->add_option("--width", report.width_s, "timeseries/peaks: bucket width in seconds")
      ->capture_default_str();
  report_cmd->add_option("--smoothing", report.smoothing, "peaks: moving-average width in buckets")
      ->capture_default_str();
  report_cmd->add_option("--prominence", report.prominence, "peaks: minimum prominence as a share of the range")
      ->capture_default_str();
  report_cmd->add_option("--series", report.series, "peaks: total, europe, north_america or australia")
      ->capture_default_str();
  report_cmd->add_option("--lens", report.lens, "peaks: render local time for europe, north_america or australia");
  report_cmd->add_option("--mode", report.session_mode, "sessions: store or snapshots")->capture_default_str();
  report_cmd->add_option("--snapshots", report.snapshot_dir, "sessions --mode snapshots: snapshot directory");

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Crawl a synthetic population and score recall per interval");
  sim_cmd->add_option("--spec", simulate.spec, "Population spec (key = value)")->required();
  sim_cmd->add_option("--intervals", simulate.intervals_s, "Crawl intervals in seconds")->delimiter(',');
  sim_cmd->add_option("--max-peers", simulate.max_peers, "Mock tracker reply size cap")->capture_default_str();
  sim_cmd->add_option("--min-online", simulate.min_online_s, "Seconds online for a peer to count as active")
      ->capture_default_str();
  sim_cmd->add_option("--truth-csv", simulate.truth_csv, "Also write the ground truth here");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Dump the peer or crawl_files collection");
  export_cmd->add_option("what", exp.what, "peers or crawl_files")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const Io io{out, err};
  try {
    config.interval = Seconds{interval_s};
    validate(config);
    if (crawl_cmd->parsed()) return cmd_crawl(config, crawl, io);
    if (ingest_cmd->parsed()) return cmd_ingest(config, ingest, io);
    if (report_cmd->parsed()) return cmd_report(config, report, io);
    if (sim_cmd->parsed()) return cmd_simulate(config, simulate, io);
    if (export_cmd->parsed()) return cmd_export(config, exp, io);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const analytics::AnalyticsError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == analytics::Errc::selector_arity || e.code() == analytics::Errc::bad_scope ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace swarmwatch::cli
