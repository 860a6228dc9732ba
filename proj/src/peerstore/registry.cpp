#include "swarmwatch/registry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "swarmwatch/csv.hpp"

namespace swarmwatch {

std::string TorrentInfo::episode_label() const {
  if (show.empty()) return name;
  if (season > 0 && episode > 0) return fmt::format("{} S{:02}E{:02}", show, season, episode);
  if (episode > 0) return fmt::format("{} E{:02}", show, episode);
  return show;
}

std::string TorrentInfo::show_label() const { return show.empty() ? name : show; }

std::uint32_t TorrentRegistry::add(TorrentInfo info) {
  const auto expected = static_cast<std::uint32_t>(torrents_.size() + 1);
  if (info.id != expected)
    throw RegistryError(fmt::format("registry: torrent id {} out of sequence (expected {})", info.id, expected));
  if (find(info.infohash) != nullptr)
    throw RegistryError(fmt::format("registry: infohash {} registered twice", info.infohash.hex()));
  torrents_.push_back(std::move(info));
  return expected;
}

const TorrentInfo* TorrentRegistry::find(std::uint32_t id) const {
  return contains(id) ? &torrents_[id - 1] : nullptr;
}

const TorrentInfo* TorrentRegistry::find(const Infohash& hash) const {
  auto it = std::find_if(torrents_.begin(), torrents_.end(), [&](const auto& t) { return t.infohash == hash; });
  return it == torrents_.end() ? nullptr : &*it;
}

namespace {

template <typename LabelFn>
std::vector<std::pair<std::string, std::vector<std::uint32_t>>> group_by(std::span<const TorrentInfo> torrents,
                                                                         LabelFn label) {
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> groups;
  for (const auto& t : torrents) {
    const std::string key = label(t);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) groups.emplace_back(key, std::vector<std::uint32_t>{t.id});
    else it->second.push_back(t.id);
  }
  return groups;
}

template <typename T>
T parse_int(const std::string& text, std::size_t line_no, const char* field) {
  T v{};
  if (text.empty()) return v;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw RegistryError(fmt::format("registry: line {}: bad {} '{}'", line_no, field, text));
  return v;
}

} // namespace

std::vector<std::pair<std::string, std::vector<std::uint32_t>>> TorrentRegistry::episodes() const {
  return group_by(torrents_, [](const TorrentInfo& t) { return t.episode_label(); });
}

std::vector<std::pair<std::string, std::vector<std::uint32_t>>> TorrentRegistry::shows() const {
  return group_by(torrents_, [](const TorrentInfo& t) { return t.show_label(); });
}

std::optional<std::vector<std::uint32_t>> TorrentRegistry::resolve_label(std::string_view label) const {
  for (const auto& [name, ids] : episodes())
    if (name == label) return ids;
  for (const auto& [name, ids] : shows())
    if (name == label) return ids;
  for (const auto& t : torrents_)
    if (t.name == label || t.infohash.hex() == label || std::to_string(t.id) == label)
      return std::vector<std::uint32_t>{t.id};
  return std::nullopt;
}

TorrentRegistry TorrentRegistry::parse_csv(std::string_view text) {
  TorrentRegistry reg;
  std::vector<std::string> f;
  bool header_seen = false;
  csv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (!header_seen) {
      if (line != registry_csv_header)
        throw RegistryError(fmt::format("registry: line 1: expected header '{}'", registry_csv_header));
      header_seen = true;
      return;
    }
    if (line.empty()) return;
    if (!csv::split_line(line, f) || f.size() != 8)
      throw RegistryError(fmt::format("registry: line {}: expected 8 fields", line_no));
    TorrentInfo t;
    t.id = parse_int<std::uint32_t>(f[0], line_no, "torrent_id");
    const auto hash = Digest20::from_hex(f[1]);
    if (!hash) throw RegistryError(fmt::format("registry: line {}: infohash is not 40 hex digits", line_no));
    t.infohash = *hash;
    t.name = f[2];
    t.size = parse_int<std::uint64_t>(f[3], line_no, "size");
    t.show = f[4];
    t.season = parse_int<int>(f[5], line_no, "season");
    t.episode = parse_int<int>(f[6], line_no, "episode");
    t.release_tag = f[7];
    reg.add(std::move(t));
  });
  if (!header_seen) throw RegistryError("registry: empty input");
  return reg;
}

TorrentRegistry TorrentRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RegistryError(fmt::format("registry: cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string TorrentRegistry::to_csv() const {
  std::string out{registry_csv_header};
  out.push_back('\n');
  for (const auto& t : torrents_)
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", t.id, t.infohash.hex(), csv::quote(t.name),
                   t.size, csv::quote(t.show), t.season, t.episode, csv::quote(t.release_tag));
  return out;
}

} // namespace swarmwatch
