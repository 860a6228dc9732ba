#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "swarmwatch/analytics.hpp"

namespace swarmwatch::cli {

namespace fs = std::filesystem;
namespace an = swarmwatch::analytics;

namespace {

template <typename Report>
void emit(const RunConfig& config, Output& output, const Report& report) {
  if (config.json) an::write_jsonl(output.stream(), report);
  else an::write_csv(output.stream(), report);
}

std::optional<an::Window> window_of(const ReportArgs& args) {
  if (!args.from && !args.to) return std::nullopt;
  if (!args.from || !args.to) throw ConfigError("give both --from and --to, or neither");
  const auto from = parse_iso8601(*args.from);
  const auto to = parse_iso8601(*args.to);
  if (!from || !to) throw ConfigError("--from/--to must be UTC instants like 2013-08-12T00:00:00Z");
  return an::Window{*from, *to};
}

std::optional<geodb::Region> parse_region(std::string_view name) {
  for (auto r : {geodb::Region::europe, geodb::Region::north_america, geodb::Region::australia})
    if (geodb::region_name(r) == name) return r;
  return std::nullopt;
}

std::vector<crawler::Snapshot> read_snapshots(const fs::path& dir, std::ostream& err) {
  std::vector<crawler::Snapshot> out;
  if (!fs::is_directory(dir)) throw ConfigError(fmt::format("snapshot directory '{}' does not exist", dir.string()));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      out.push_back(crawler::parse_snapshot_xml(ss.str()));
    } catch (const std::exception& e) {
      err << fmt::format("warning: skipping {}: {}\n", f.string(), e.what());
    }
  }
  return out;
}

} // namespace

int cmd_report(const RunConfig& config, const ReportArgs& args, Io io) {
  static const std::vector<std::string> kinds{"swarms",     "episodes", "venn",     "geo",
                                              "timeseries", "peaks",    "activity", "sessions"};
  if (std::find(kinds.begin(), kinds.end(), args.kind) == kinds.end())
    throw ConfigError(fmt::format("unknown report '{}'", args.kind));
  if (args.kind != "venn" && !args.selectors.empty())
    throw ConfigError(fmt::format("report {} takes no positional arguments", args.kind));

  auto store = open_store(config);
  Output output(config, io.out);

  if (args.kind == "swarms") {
    emit(config, output, an::swarm_table(*store));
  } else if (args.kind == "episodes") {
    emit(config, output, an::episode_table(*store));
  } else if (args.kind == "venn") {
    const auto registry = store->registry();
    std::vector<an::Selector> selectors;
    for (const auto& s : args.selectors) selectors.push_back(an::resolve_selector(registry, s));
    emit(config, output, an::cross_participation(selectors, *store));
  } else if (args.kind == "geo") {
    const auto level = an::parse_geo_level(args.level);
    if (!level) throw ConfigError(fmt::format("unknown geo level '{}'", args.level));
    emit(config, output, an::geo_top(*store, *level, args.n, args.scope));
  } else if (args.kind == "timeseries" || args.kind == "peaks") {
    if (args.width_s <= 0) throw ConfigError("--width must be positive");
    const auto series = an::timeseries(*store, args.torrent, window_of(args), Seconds{args.width_s});
    if (args.kind == "timeseries") {
      emit(config, output, series);
    } else {
      an::PeakOptions options;
      options.smoothing = args.smoothing;
      options.min_prominence = args.prominence;
      const auto which = an::parse_series(args.series);
      if (!which) throw ConfigError(fmt::format("unknown series '{}'", args.series));
      options.series = *which;
      if (args.lens) {
        options.lens = parse_region(*args.lens);
        if (!options.lens) throw ConfigError(fmt::format("unknown lens '{}'", *args.lens));
      }
      const auto peaks = an::detect_peaks(series, options);
      emit(config, output, std::span<const an::Peak>(peaks));
    }
  } else if (args.kind == "activity") {
    emit(config, output, an::activity_stats(*store, config.interval));
  } else if (args.kind == "sessions") {
    std::vector<an::SessionSpan> spans;
    an::SessionMode mode = an::SessionMode::store;
    if (args.session_mode == "store") {
      spans = an::session_durations(*store);
    } else if (args.session_mode == "snapshots") {
      mode = an::SessionMode::snapshots;
      const auto snaps = read_snapshots(args.snapshot_dir.value_or(*config.store / "snapshots"), io.err);
      spans = an::session_durations(snaps);
    } else {
      throw ConfigError(fmt::format("unknown session mode '{}'", args.session_mode));
    }
    if (config.json) an::write_jsonl(output.stream(), spans, mode);
    else an::write_csv(output.stream(), spans, mode);
  }
  output.finish();
  return 0;
}

} // namespace swarmwatch::cli
