#include "swarmwatch/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

namespace swarmwatch::crawler {

Snapshot make_snapshot(const CrawlCycleResult& result, const geodb::GeoTable& geo) {
  Snapshot s;
  s.torrent_id = result.torrent_id;
  s.infohash = result.infohash;
  s.time = result.started_at;
  s.seeders = result.seeders;
  s.leechers = result.leechers;
  s.peers.reserve(result.peers.size());
  for (const auto& ep : result.peers) {
    s.peers.push_back({ep, ep.ip.is_bogon()});
    const auto* rec = geo.lookup(ep.ip);
    if (rec == nullptr) continue;
    switch (geodb::classify_region(rec->country)) {
    case geodb::Region::europe: ++s.euro_count; break;
    case geodb::Region::north_america: ++s.na_count; break;
    case geodb::Region::australia: ++s.aus_count; break;
    default: break;
    }
  }
  s.peer_count = s.peers.size();
  return s;
}

namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default: out.push_back(c);
    }
  }
  return out;
}

[[noreturn]] void violation(const std::string& why) { throw SchemaViolation("snapshot: " + why); }

template <typename T>
T number_attr(const boost::property_tree::ptree& attrs, const char* name) {
  const auto text = attrs.get_optional<std::string>(name);
  if (!text) violation(fmt::format("missing attribute '{}'", name));
  T v{};
  auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (text->empty() || ec != std::errc{} || ptr != text->data() + text->size())
    violation(fmt::format("attribute '{}' is not a number: '{}'", name, *text));
  return v;
}

std::string string_attr(const boost::property_tree::ptree& attrs, const char* name) {
  const auto text = attrs.get_optional<std::string>(name);
  if (!text) violation(fmt::format("missing attribute '{}'", name));
  return *text;
}

} // namespace

std::string render_snapshot_xml(const Snapshot& s) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  fmt::format_to(std::back_inserter(out),
                 "<crawl torrent_id=\"{}\" infohash=\"{}\" network=\"{}\" time=\"{}\" peer_count=\"{}\" seeders=\"{}\" "
                 "leechers=\"{}\" euro_count=\"{}\" na_count=\"{}\" aus_count=\"{}\">\n",
                 s.torrent_id, s.infohash.hex(), xml_escape(s.network), format_iso8601(s.time), s.peer_count,
                 s.seeders, s.leechers, s.euro_count, s.na_count, s.aus_count);
  for (const auto& p : s.peers)
    fmt::format_to(std::back_inserter(out), "  <peer ip=\"{}\" port=\"{}\" bogon=\"{}\"/>\n", p.endpoint.ip.to_string(),
                   p.endpoint.port, p.bogon ? "true" : "false");
  out += "</crawl>\n";
  return out;
}

Snapshot parse_snapshot_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string{xml}};
    pt::read_xml(in, doc, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    violation(fmt::format("not well-formed XML: {}", e.message()));
  }

  const pt::ptree* crawl = nullptr;
  for (const auto& [name, child] : doc) {
    if (name == "<xmlcomment>") continue;
    if (name != "crawl" || crawl != nullptr) violation(fmt::format("unexpected top-level element '{}'", name));
    crawl = &child;
  }
  if (crawl == nullptr) violation("missing <crawl> element");

  const auto attrs_opt = crawl->get_child_optional("<xmlattr>");
  if (!attrs_opt) violation("<crawl> has no attributes");
  const pt::ptree& attrs = *attrs_opt;

  Snapshot s;
  s.torrent_id = number_attr<std::uint32_t>(attrs, "torrent_id");
  const auto hash = Digest20::from_hex(string_attr(attrs, "infohash"));
  if (!hash) violation("infohash is not 40 hex digits");
  s.infohash = *hash;
  s.network = string_attr(attrs, "network");
  const auto time = parse_iso8601(string_attr(attrs, "time"));
  if (!time) violation("time is not ISO-8601 UTC");
  s.time = *time;
  s.peer_count = number_attr<std::uint64_t>(attrs, "peer_count");
  s.seeders = number_attr<std::uint32_t>(attrs, "seeders");
  s.leechers = number_attr<std::uint32_t>(attrs, "leechers");
  s.euro_count = number_attr<std::uint64_t>(attrs, "euro_count");
  s.na_count = number_attr<std::uint64_t>(attrs, "na_count");
  s.aus_count = number_attr<std::uint64_t>(attrs, "aus_count");

  for (const auto& [name, child] : *crawl) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (name != "peer") violation(fmt::format("unexpected element <{}>", name));
    const auto peer_attrs = child.get_child_optional("<xmlattr>");
    if (!peer_attrs) violation("<peer> has no attributes");
    const auto ip = Ipv4::parse(string_attr(*peer_attrs, "ip"));
    if (!ip) violation("peer ip is not a dotted quad");
    const auto port = number_attr<std::uint16_t>(*peer_attrs, "port");
    const auto bogon = string_attr(*peer_attrs, "bogon");
    if (bogon != "true" && bogon != "false") violation("peer bogon must be true or false");
    s.peers.push_back({{*ip, port}, bogon == "true"});
  }

  if (s.peer_count != s.peers.size())
    violation(fmt::format("peer_count {} but {} <peer> elements", s.peer_count, s.peers.size()));
  if (s.euro_count + s.na_count + s.aus_count > s.peer_count) violation("regional counts exceed peer_count");
  return s;
}

std::filesystem::path snapshot_relative_path(const Snapshot& s) {
  return std::filesystem::path{s.infohash.hex()} / (format_compact(s.time) + ".xml");
}

std::filesystem::path write_snapshot(const std::filesystem::path& root, const Snapshot& s) {
  const auto path = root / snapshot_relative_path(s);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw SnapshotIoError(fmt::format("snapshot: cannot create '{}': {}", path.parent_path().string(), ec.message()));
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const std::string doc = render_snapshot_xml(s);
    out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
    if (!out) throw SnapshotIoError(fmt::format("snapshot: cannot write '{}'", tmp));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw SnapshotIoError(fmt::format("snapshot: cannot rename to '{}': {}", path.string(), ec.message()));
  return path;
}

} // namespace swarmwatch::crawler
