#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "swarmwatch/csv.hpp"

namespace swarmwatch::cli {

namespace fs = std::filesystem;

namespace {

/// Snapshot files are named by their compact UTC time, so sorting on the
/// file name orders them by crawl time.
std::vector<fs::path> collect(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    const auto sa = a.filename().string();
    const auto sb = b.filename().string();
    return sa != sb ? sa < sb : a < b;
  });
  return files;
}

RegionHistogram read_counts(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  RegionHistogram counts;
  std::vector<std::string> f;
  csv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto where = fmt::format("{}:{}", path.string(), line_no);
    if (line_no == 1) {
      if (line != "torrents,peers") throw ConfigError(fmt::format("{}: expected header 'torrents,peers'", where));
      return;
    }
    if (line.empty()) return;
    if (!csv::split_line(line, f) || f.size() != 2) throw ConfigError(fmt::format("{}: expected two fields", where));
    std::vector<std::uint32_t> ids;
    std::istringstream id_stream(f[0]);
    std::string token;
    while (id_stream >> token) {
      std::uint32_t id = 0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
      if (ec != std::errc{} || ptr != token.data() + token.size() || id == 0)
        throw ConfigError(fmt::format("{}: bad torrent id '{}'", where, token));
      ids.push_back(id);
    }
    if (ids.empty()) throw ConfigError(fmt::format("{}: no torrent ids", where));
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), n);
    if (f[1].empty() || ec != std::errc{} || ptr != f[1].data() + f[1].size())
      throw ConfigError(fmt::format("{}: bad peer count '{}'", where, f[1]));
    counts.add(Membership::of(ids), n);
  });
  return counts;
}

} // namespace

int cmd_ingest(const RunConfig& config, const IngestArgs& args, Io io) {
  if (args.paths.empty() && !args.regeolocate && !args.counts)
    throw ConfigError("ingest needs snapshot paths, --counts or --regeolocate");
  for (const auto& p : args.paths)
    if (!fs::exists(p)) throw ConfigError(fmt::format("'{}' does not exist", p.string()));
  std::optional<RegionHistogram> counts;
  if (args.counts) counts = read_counts(*args.counts);
  const auto geo = args.paths.empty() && !args.regeolocate ? geodb::GeoTable{} : load_geo(config);
  auto store = open_store(config);
  if (counts) {
    store->import_counts(*counts);
    io.out << fmt::format("counted_peers={}\n", counts->total());
  }

  IngestStats total;
  std::size_t failed = 0;
  for (const auto& file : collect(args.paths)) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in) {
      ++failed;
      io.err << fmt::format("error: {}: cannot read\n", file.string());
      continue;
    }
    try {
      total += store->ingest_snapshot(ss.str(), geo);
    } catch (const std::exception& e) {
      ++failed;
      io.err << fmt::format("error: {}: {}\n", file.string(), e.what());
    }
  }
  if (args.regeolocate) io.out << fmt::format("regeolocated={}\n", store->regeolocate(geo));
  store->checkpoint();
  io.out << fmt::format("files={} deduped={} failed={} peers_upserted={} new_peers={} bogons_skipped={}\n",
                        total.files, total.deduped, failed, total.peers_upserted, total.new_peers,
                        total.bogons_skipped);
  return failed == 0 ? 0 : 1;
}

} // namespace swarmwatch::cli
