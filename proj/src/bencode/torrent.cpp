#include "swarmwatch/torrent.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <fmt/format.h>

#include "swarmwatch/digest.hpp"

namespace swarmwatch {

namespace {

[[noreturn]] void fail(TorrentErrc code, const std::string& why) { throw TorrentError(code, "torrent: " + why); }

std::uint64_t require_positive(const bencode::Value& dict, std::string_view key) {
  const auto* v = dict.find(key);
  if (v == nullptr) fail(TorrentErrc::missing_required_field, fmt::format("missing '{}'", key));
  if (!v->is_integer() || v->as_integer() < 0)
    fail(TorrentErrc::malformed_input, fmt::format("'{}' is not a non-negative integer", key));
  return static_cast<std::uint64_t>(v->as_integer());
}

void push_unique(std::vector<std::string>& urls, const std::string& url) {
  if (!url.empty() && std::find(urls.begin(), urls.end(), url) == urls.end()) urls.push_back(url);
}

} // namespace

TorrentMeta parse_torrent(std::string_view bytes, const bencode::DecodeOptions& options) {
  bencode::Value root;
  std::string_view info_span;
  try {
    root = bencode::decode(bytes, options);
    if (!root.is_dict()) fail(TorrentErrc::malformed_input, "top level is not a dictionary");
    info_span = bencode::raw_dict_value(bytes, "info", options);
  } catch (const bencode::Error& e) {
    fail(TorrentErrc::malformed_input, e.what());
  }

  const auto* info = root.find("info");
  if (info == nullptr || !info->is_dict()) fail(TorrentErrc::missing_info_dict, "no 'info' dictionary");

  TorrentMeta meta;
  meta.infohash = sha1(info_span);

  const auto* name = info->find("name");
  if (name == nullptr || !name->is_bytes()) fail(TorrentErrc::missing_required_field, "missing 'name'");
  meta.name = name->as_bytes();

  meta.piece_length = require_positive(*info, "piece length");
  if (meta.piece_length == 0) fail(TorrentErrc::malformed_input, "'piece length' must be positive");

  if (const auto* files = info->find("files"); files != nullptr) {
    if (!files->is_list()) fail(TorrentErrc::malformed_input, "'files' is not a list");
    for (const auto& f : files->as_list()) {
      if (!f.is_dict()) fail(TorrentErrc::malformed_input, "file entry is not a dictionary");
      meta.total_size += require_positive(f, "length");
    }
  } else {
    meta.total_size = require_positive(*info, "length");
  }

  if (const auto* pieces = info->find("pieces"); pieces != nullptr) {
    if (!pieces->is_bytes()) fail(TorrentErrc::malformed_input, "'pieces' is not a byte string");
    const auto& blob = pieces->as_bytes();
    if (blob.size() % Digest20::size != 0)
      fail(TorrentErrc::bad_piece_hash_block, fmt::format("'pieces' length {} is not a multiple of 20", blob.size()));
    for (std::size_t i = 0; i < blob.size(); i += Digest20::size)
      meta.piece_hashes.push_back(*Digest20::from_bytes(std::string_view(blob).substr(i, Digest20::size)));
    const std::uint64_t expected = (meta.total_size + meta.piece_length - 1) / meta.piece_length;
    if (!meta.piece_hashes.empty() && meta.piece_hashes.size() != expected)
      fail(TorrentErrc::bad_piece_hash_block,
           fmt::format("{} piece hashes for {} pieces", meta.piece_hashes.size(), expected));
  }

  if (const auto* announce = root.find("announce"); announce != nullptr && announce->is_bytes())
    push_unique(meta.announce_urls, announce->as_bytes());
  if (const auto* tiers = root.find("announce-list"); tiers != nullptr && tiers->is_list()) {
    for (const auto& tier : tiers->as_list()) {
      if (!tier.is_list()) continue;
      for (const auto& url : tier.as_list())
        if (url.is_bytes()) push_unique(meta.announce_urls, url.as_bytes());
    }
  }
  return meta;
}

std::string percent_decode(std::string_view text, bool plus_as_space) {
  const auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '%' && i + 2 < text.size()) {
      const int hi = hex(text[i + 1]);
      const int lo = hex(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi << 4 | lo));
        i += 2;
        continue;
      }
    }
    out.push_back(plus_as_space && c == '+' ? ' ' : c);
  }
  return out;
}

namespace {

std::optional<Digest20> decode_base32(std::string_view text) {
  Digest20::Bytes out{};
  std::uint64_t buffer = 0;
  int bits = 0;
  std::size_t n = 0;
  for (char c : text) {
    int v;
    if (c >= 'A' && c <= 'Z') v = c - 'A';
    else if (c >= 'a' && c <= 'z') v = c - 'a';
    else if (c >= '2' && c <= '7') v = c - '2' + 26;
    else return std::nullopt;
    buffer = (buffer << 5) | static_cast<std::uint64_t>(v);
    bits += 5;
    if (bits >= 8) {
      bits -= 8;
      out[n++] = static_cast<std::uint8_t>((buffer >> bits) & 0xff);
    }
  }
  return Digest20{out};
}

} // namespace

TorrentMeta parse_magnet(std::string_view uri) {
  constexpr std::string_view scheme = "magnet:";
  if (uri.size() < scheme.size() ||
      !std::equal(scheme.begin(), scheme.end(), uri.begin(),
                  [](char a, char b) { return a == std::tolower(static_cast<unsigned char>(b)); }))
    fail(TorrentErrc::bad_scheme, "not a magnet URI");
  uri.remove_prefix(scheme.size());
  if (!uri.empty() && uri.front() == '?') uri.remove_prefix(1);

  TorrentMeta meta;
  bool have_hash = false;
  while (!uri.empty()) {
    const auto amp = uri.find('&');
    const std::string_view param = uri.substr(0, amp);
    uri = amp == std::string_view::npos ? std::string_view{} : uri.substr(amp + 1);
    const auto eq = param.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = param.substr(0, eq);
    const std::string_view value = param.substr(eq + 1);

    if (key == "xt" && !have_hash) {
      constexpr std::string_view urn = "urn:btih:";
      const std::string decoded = percent_decode(value);
      if (decoded.rfind(urn, 0) != 0) continue;
      const std::string_view hash = std::string_view(decoded).substr(urn.size());
      std::optional<Digest20> digest;
      if (hash.size() == 40) digest = Digest20::from_hex(hash);
      else if (hash.size() == 32) digest = decode_base32(hash);
      else fail(TorrentErrc::bad_infohash_length, fmt::format("btih of length {}", hash.size()));
      if (!digest) fail(TorrentErrc::bad_infohash_encoding, "btih is neither hex nor base32");
      meta.infohash = *digest;
      have_hash = true;
    } else if (key == "dn") {
      meta.name = percent_decode(value, true);
    } else if (key == "tr") {
      push_unique(meta.announce_urls, percent_decode(value));
    }
  }
  if (!have_hash) fail(TorrentErrc::bad_infohash_encoding, "missing xt=urn:btih parameter");
  return meta;
}

std::string format_size(std::uint64_t bytes) {
  static constexpr const char* units[] = {"B", "KB", "MB", "GB", "TB"};
  double v = static_cast<double>(bytes);
  std::size_t u = 0;
  while (v >= 1024.0 && u + 1 < std::size(units)) {
    v /= 1024.0;
    ++u;
  }
  return u == 0 ? fmt::format("{} B", bytes) : fmt::format("{:.2f} {}", v, units[u]);
}

} // namespace swarmwatch
