#pragma once

// Monitored torrents with their episode labels. CSV form:
//
//   torrent_id,infohash,name,size,show,season,episode,release_tag
//
// Ids are dense 1..N in file order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarmwatch/net.hpp"

namespace swarmwatch {

class RegistryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TorrentInfo {
  std::uint32_t id = 0;
  Infohash infohash;
  std::string name;
  std::uint64_t size = 0;
  std::string show;
  int season = 0;
  int episode = 0;
  std::string release_tag;

  /// "Breaking Bad S05E09"; falls back to the torrent name when unlabeled.
  std::string episode_label() const;
  /// Show name, or the torrent name when unlabeled.
  std::string show_label() const;
};

inline constexpr std::string_view registry_csv_header = "torrent_id,infohash,name,size,show,season,episode,release_tag";

class TorrentRegistry {
public:
  /// `info.id` must be size()+1 and the infohash new. Returns the id.
  std::uint32_t add(TorrentInfo info);

  const TorrentInfo* find(std::uint32_t id) const;
  const TorrentInfo* find(const Infohash& hash) const;
  bool contains(std::uint32_t id) const { return id >= 1 && id <= torrents_.size(); }

  std::span<const TorrentInfo> torrents() const { return torrents_; }
  std::size_t size() const { return torrents_.size(); }
  bool empty() const { return torrents_.empty(); }

  /// Episode label -> ids, in order of first appearance.
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> episodes() const;
  /// Show label -> ids, in order of first appearance.
  std::vector<std::pair<std::string, std::vector<std::uint32_t>>> shows() const;
  /// Ids whose episode label, show label or torrent name equals `label`.
  std::optional<std::vector<std::uint32_t>> resolve_label(std::string_view label) const;

  static TorrentRegistry parse_csv(std::string_view text);
  static TorrentRegistry load(const std::filesystem::path& path);
  std::string to_csv() const;

private:
  std::vector<TorrentInfo> torrents_;
};

} // namespace swarmwatch
