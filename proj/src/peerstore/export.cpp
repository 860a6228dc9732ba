#include "swarmwatch/peerstore.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "swarmwatch/csv.hpp"

namespace swarmwatch {

using nlohmann::ordered_json;

void export_peers_csv(const PeerStore& store, std::ostream& out) {
  const std::size_t n = store.registry().size();
  out << "IP,country,state,city,ISP,longitude,latitude";
  for (std::size_t t = 1; t <= n; ++t) out << ",t_" << t;
  out << '\n';
  store.for_each_matching({}, [&](const PeerRecord& p) {
    out << p.ip.to_string() << ',' << csv::quote(p.country) << ',' << csv::quote(p.state) << ','
        << csv::quote(p.city) << ',' << csv::quote(p.isp) << ',' << fmt::format("{:.4f},{:.4f}", p.longitude, p.latitude);
    for (std::size_t t = 1; t <= n; ++t) out << (p.membership.test(static_cast<std::uint32_t>(t)) ? ",true" : ",false");
    out << '\n';
  });
}

void export_peers_jsonl(const PeerStore& store, std::ostream& out) {
  const std::size_t n = store.registry().size();
  store.for_each_matching({}, [&](const PeerRecord& p) {
    ordered_json j{{"IP", p.ip.to_string()}, {"country", p.country}, {"state", p.state},
                   {"city", p.city},         {"ISP", p.isp},         {"longitude", p.longitude},
                   {"latitude", p.latitude}};
    for (std::size_t t = 1; t <= n; ++t) j[fmt::format("t_{}", t)] = p.membership.test(static_cast<std::uint32_t>(t));
    out << j.dump() << '\n';
  });
}

void export_crawl_files_csv(const PeerStore& store, std::ostream& out) {
  out << "time,network,peer_count,torrent_id,EuroCount,NACount,AUSCount\n";
  for (const auto& s : store.snapshots())
    out << format_iso8601(s.time) << ',' << csv::quote(s.network) << ',' << s.peer_count << ',' << s.torrent_id << ','
        << s.euro_count << ',' << s.na_count << ',' << s.aus_count << '\n';
}

void export_crawl_files_jsonl(const PeerStore& store, std::ostream& out) {
  for (const auto& s : store.snapshots()) {
    ordered_json j{{"time", format_iso8601(s.time)}, {"network", s.network},     {"peer_count", s.peer_count},
                   {"torrent_id", s.torrent_id},     {"EuroCount", s.euro_count}, {"NACount", s.na_count},
                   {"AUSCount", s.aus_count}};
    out << j.dump() << '\n';
  }
}

} // namespace swarmwatch
