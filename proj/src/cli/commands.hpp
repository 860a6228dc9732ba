#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmwatch/cli.hpp"
#include "swarmwatch/geodb.hpp"
#include "swarmwatch/peerstore.hpp"

namespace swarmwatch::cli {

/// A usage or configuration problem; exit status 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

/// Validates ranges and required paths; throws ConfigError.
void validate(const RunConfig& config);
geodb::GeoTable load_geo(const RunConfig& config);
std::unique_ptr<PeerStore> open_store(const RunConfig& config);
/// Report destination: the --out file when given, else `fallback`.
class Output {
public:
  Output(const RunConfig& config, std::ostream& fallback);
  std::ostream& stream() { return file_ ? *file_ : fallback_; }
  void finish();

private:
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
  std::filesystem::path path_;
};

struct CrawlArgs {
  std::vector<std::string> inputs;
  std::optional<std::string> duration;
  std::optional<std::size_t> cycles;
  std::optional<std::string> virtual_start;
  std::optional<std::filesystem::path> snapshot_dir;
  std::vector<double> udp_timeouts_s{15, 30, 60};
  bool parallel = false;
};

struct IngestArgs {
  std::vector<std::filesystem::path> paths;
  bool regeolocate = false;
  /// CSV `torrents,peers`: space-separated torrent ids of an exact
  /// membership set and the number of peers in it.
  std::optional<std::filesystem::path> counts;
};

struct ReportArgs {
  std::string kind;
  std::vector<std::string> selectors;
  std::string level = "country";
  std::size_t n = 10;
  std::optional<std::string> scope;
  std::optional<std::uint32_t> torrent;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::int64_t width_s = 120;
  std::size_t smoothing = 1;
  double prominence = 0.10;
  std::string series = "total";
  std::optional<std::string> lens;
  std::string session_mode = "store";
  std::optional<std::filesystem::path> snapshot_dir;
};

struct SimulateArgs {
  std::filesystem::path spec;
  std::vector<std::int64_t> intervals_s{120, 600, 3600};
  std::size_t max_peers = 200;
  std::int64_t min_online_s = 0;
  std::optional<std::filesystem::path> truth_csv;
};

struct ExportArgs {
  std::string what = "peers";
};

int cmd_crawl(const RunConfig& config, const CrawlArgs& args, Io io);
int cmd_ingest(const RunConfig& config, const IngestArgs& args, Io io);
int cmd_report(const RunConfig& config, const ReportArgs& args, Io io);
int cmd_simulate(const RunConfig& config, const SimulateArgs& args, Io io);
int cmd_export(const RunConfig& config, const ExportArgs& args, Io io);

} // namespace swarmwatch::cli
