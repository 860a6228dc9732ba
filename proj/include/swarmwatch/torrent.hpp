#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmwatch/bencode.hpp"
#include "swarmwatch/net.hpp"

namespace swarmwatch {

inline constexpr std::uint64_t default_piece_length = 524288;

enum class TorrentErrc {
  malformed_input,
  missing_info_dict,
  missing_required_field,
  bad_piece_hash_block,
  bad_scheme,
  bad_infohash_length,
  bad_infohash_encoding,
};

class TorrentError : public std::runtime_error {
public:
  TorrentError(TorrentErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  TorrentErrc code() const { return code_; }

private:
  TorrentErrc code_;
};

struct TorrentMeta {
  Infohash infohash;
  /// Raw bytes of the `name` field (the client's save-as name).
  std::string name;
  std::uint64_t total_size = 0;
  std::uint64_t piece_length = default_piece_length;
  std::vector<Digest20> piece_hashes;
  std::vector<std::string> announce_urls;
};

/// The infohash is taken over the original bytes of the `info` value, so
/// non-canonical inputs accepted in lenient mode still hash correctly.
TorrentMeta parse_torrent(std::string_view bytes, const bencode::DecodeOptions& options = {.strict = false});

/// `magnet:?xt=urn:btih:<40 hex | 32 base32>[&dn=..][&tr=..]*`
TorrentMeta parse_magnet(std::string_view uri);

/// Human-readable size in binary units, two decimals: "327.93 MB".
std::string format_size(std::uint64_t bytes);

/// Decodes %XX escapes; with `plus_as_space`, '+' becomes ' '. Malformed escapes pass through.
std::string percent_decode(std::string_view text, bool plus_as_space = false);

} // namespace swarmwatch
