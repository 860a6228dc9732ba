#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "commands.hpp"

namespace swarmwatch::cli {

std::optional<Seconds> parse_duration(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t scale = 1;
  switch (text.back()) {
  case 's': scale = 1; text.remove_suffix(1); break;
  case 'm': scale = 60; text.remove_suffix(1); break;
  case 'h': scale = 3600; text.remove_suffix(1); break;
  case 'd': scale = 86400; text.remove_suffix(1); break;
  default: break;
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(v > 0) || !std::isfinite(v)) return std::nullopt;
  return Seconds{static_cast<std::int64_t>(std::llround(v * static_cast<double>(scale)))};
}

void validate(const RunConfig& config) {
  if (config.interval < Seconds{1} || config.interval > Seconds{86400})
    throw ConfigError("--interval must lie between 1 s and 1 day");
  if (config.saturation < 1 || config.saturation > 1000) throw ConfigError("--saturation must lie in [1, 1000]");
  if (config.budget < 1 || config.budget > 100000) throw ConfigError("--budget must lie in [1, 100000]");
  if (config.numwant < 1 || config.numwant > 10000) throw ConfigError("--numwant must lie in [1, 10000]");
  if (config.geo && !std::filesystem::is_regular_file(*config.geo))
    throw ConfigError(fmt::format("geo table '{}' does not exist", config.geo->string()));
  if (config.registry && !std::filesystem::is_regular_file(*config.registry))
    throw ConfigError(fmt::format("registry '{}' does not exist", config.registry->string()));
}

geodb::GeoTable load_geo(const RunConfig& config) {
  if (!config.geo) throw ConfigError("this command needs --geo");
  return geodb::GeoTable::load(*config.geo);
}

std::unique_ptr<PeerStore> open_store(const RunConfig& config) {
  if (!config.store) throw ConfigError(fmt::format("this command needs --store or {}", store_env_var));
  if (config.registry) {
    const auto registry = TorrentRegistry::load(*config.registry);
    return PeerStore::open(*config.store, &registry);
  }
  return PeerStore::open(*config.store);
}

Output::Output(const RunConfig& config, std::ostream& fallback) : fallback_(fallback) {
  if (!config.output) return;
  path_ = *config.output;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  file_ = std::make_unique<std::ofstream>(path_, std::ios::binary | std::ios::trunc);
  if (!*file_) throw ConfigError(fmt::format("cannot write '{}'", path_.string()));
}

void Output::finish() {
  stream().flush();
  if (file_ && !*file_) throw std::runtime_error(fmt::format("writing '{}' failed", path_.string()));
}

} // namespace swarmwatch::cli
