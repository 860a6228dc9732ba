#include "swarmwatch/analytics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "swarmwatch/csv.hpp"

namespace swarmwatch::analytics {

using nlohmann::ordered_json;

namespace {

std::string id_list(std::span<const std::uint32_t> ids) {
  std::string s;
  for (auto id : ids) s += (s.empty() ? "" : ";") + std::to_string(id);
  return s;
}

// Percentages go into JSON as numbers with exactly the printed precision.
ordered_json pct(const Percent& p) { return ordered_json::parse(p.str()); }

} // namespace

void write_csv(std::ostream& out, const ParticipationReport& r) {
  out << "label,torrent_ids,distinct_ips,overall_pct\n";
  for (const auto& row : r.rows)
    out << csv::quote(row.label) << ',' << id_list(row.ids) << ',' << row.distinct_ips << ',' << row.overall.str()
        << '\n';
}

void write_jsonl(std::ostream& out, const ParticipationReport& r) {
  for (const auto& row : r.rows)
    out << ordered_json{{"label", row.label},
                        {"torrent_ids", row.ids},
                        {"distinct_ips", row.distinct_ips},
                        {"overall_pct", pct(row.overall)},
                        {"global_distinct", r.global_distinct}}
               .dump()
        << '\n';
}

void write_csv(std::ostream& out, const VennReport& r) {
  out << "kind,label,count,pct\n";
  for (std::size_t i = 0; i < r.selectors.size(); ++i)
    out << "set," << csv::quote(r.selectors[i].label) << ',' << r.set_sizes[i] << ','
        << percent_of(r.set_sizes[i], r.union_count).str() << '\n';
  out << "union,all," << r.union_count << ",100.00\n";
  for (const auto& region : r.regions)
    out << "region," << csv::quote(region.label) << ',' << region.count << ',' << region.share.str() << '\n';
  for (const auto& p : r.pairs) {
    const auto label = r.selectors[p.a].label + " & " + r.selectors[p.b].label;
    out << "pair_of_union," << csv::quote(label) << ',' << p.intersection << ',' << p.of_union.str() << '\n';
    out << "pair_of_first," << csv::quote(label) << ',' << p.intersection << ',' << p.of_first.str() << '\n';
    out << "pair_of_second," << csv::quote(label) << ',' << p.intersection << ',' << p.of_second.str() << '\n';
  }
}

void write_jsonl(std::ostream& out, const VennReport& r) {
  for (std::size_t i = 0; i < r.selectors.size(); ++i)
    out << ordered_json{{"kind", "set"},
                        {"label", r.selectors[i].label},
                        {"torrent_ids", r.selectors[i].ids},
                        {"count", r.set_sizes[i]}}
               .dump()
        << '\n';
  out << ordered_json{{"kind", "union"}, {"count", r.union_count}}.dump() << '\n';
  for (const auto& region : r.regions)
    out << ordered_json{{"kind", "region"},
                        {"label", region.label},
                        {"count", region.count},
                        {"pct", pct(region.share)}}
               .dump()
        << '\n';
  for (const auto& p : r.pairs)
    out << ordered_json{{"kind", "pair"},
                        {"a", r.selectors[p.a].label},
                        {"b", r.selectors[p.b].label},
                        {"intersection", p.intersection},
                        {"union", p.union_count},
                        {"pct_of_union", pct(p.of_union)},
                        {"pct_of_a", pct(p.of_first)},
                        {"pct_of_b", pct(p.of_second)}}
               .dump()
        << '\n';
}

void write_csv(std::ostream& out, const GeoReport& r) {
  out << "rank,label,country,value,count,pct,cumulative_pct\n";
  for (const auto& row : r.rows)
    out << row.rank << ',' << csv::quote(row.label) << ',' << row.country << ',' << csv::quote(row.value) << ','
        << row.count << ',' << row.share.str() << ',' << row.cumulative.str() << '\n';
}

void write_jsonl(std::ostream& out, const GeoReport& r) {
  for (const auto& row : r.rows)
    out << ordered_json{{"rank", row.rank},
                        {"level", geo_level_name(r.level)},
                        {"label", row.label},
                        {"country", row.country},
                        {"value", row.value},
                        {"count", row.count},
                        {"pct", pct(row.share)},
                        {"cumulative_pct", pct(row.cumulative)},
                        {"scope_total", r.total}}
               .dump()
        << '\n';
}

void write_csv(std::ostream& out, const SwarmTimeSeries& s) {
  out << "bucket_start,total,europe,north_america,australia\n";
  for (std::size_t i = 0; i < s.buckets.size(); ++i) {
    out << format_iso8601(s.bucket_start(i));
    if (const auto& b = s.buckets[i])
      out << ',' << b->total << ',' << b->europe << ',' << b->north_america << ',' << b->australia << '\n';
    else
      out << ",,,,\n";
  }
}

void write_jsonl(std::ostream& out, const SwarmTimeSeries& s) {
  for (std::size_t i = 0; i < s.buckets.size(); ++i) {
    ordered_json j{{"bucket_start", format_iso8601(s.bucket_start(i))}};
    if (const auto& b = s.buckets[i]) {
      j["total"] = b->total;
      j["europe"] = b->europe;
      j["north_america"] = b->north_america;
      j["australia"] = b->australia;
    } else {
      for (const char* k : {"total", "europe", "north_america", "australia"}) j[k] = nullptr;
    }
    out << j.dump() << '\n';
  }
}

void write_csv(std::ostream& out, std::span<const Peak> peaks) {
  out << "bucket,time,magnitude,prominence,local_time\n";
  for (const auto& p : peaks)
    out << p.bucket << ',' << format_iso8601(p.time) << ',' << fmt::format("{:.2f},{:.2f}", p.magnitude, p.prominence)
        << ',' << p.local_time.value_or("") << '\n';
}

void write_jsonl(std::ostream& out, std::span<const Peak> peaks) {
  for (const auto& p : peaks) {
    ordered_json j{{"bucket", p.bucket},
                   {"time", format_iso8601(p.time)},
                   {"magnitude", p.magnitude},
                   {"prominence", p.prominence}};
    j["local_time"] = p.local_time ? ordered_json(*p.local_time) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

void write_csv(std::ostream& out, const ActivityStats& a) {
  out << "total_hits,distinct_ips,avg_hits_per_ip,est_avg_activity_s,est_avg_activity_h\n";
  out << a.total_hits << ',' << a.distinct_ips << ','
      << fmt::format("{:.4f},{:.1f},{:.4f}", a.avg_hits_per_ip, a.est_avg_activity.count(),
                     a.est_avg_activity.count() / 3600.0)
      << '\n';
}

void write_jsonl(std::ostream& out, const ActivityStats& a) {
  out << ordered_json{{"total_hits", a.total_hits},
                      {"distinct_ips", a.distinct_ips},
                      {"avg_hits_per_ip", a.avg_hits_per_ip},
                      {"est_avg_activity_s", a.est_avg_activity.count()}}
             .dump()
      << '\n';
}

void write_csv(std::ostream& out, std::span<const SessionSpan> spans, SessionMode mode) {
  out << "mode,ip,torrent_id,first_seen,last_seen,span_s,sightings\n";
  for (const auto& s : spans)
    out << session_mode_name(mode) << ',' << s.ip.to_string() << ',' << s.torrent_id << ','
        << format_iso8601(s.first_seen) << ',' << format_iso8601(s.last_seen) << ',' << s.span.count() << ','
        << s.sightings << '\n';
}

void write_jsonl(std::ostream& out, std::span<const SessionSpan> spans, SessionMode mode) {
  for (const auto& s : spans) {
    ordered_json j{{"mode", session_mode_name(mode)}, {"ip", s.ip.to_string()}};
    if (mode == SessionMode::snapshots) j["torrent_id"] = s.torrent_id;
    j["first_seen"] = format_iso8601(s.first_seen);
    j["last_seen"] = format_iso8601(s.last_seen);
    j["span_s"] = s.span.count();
    j["sightings"] = s.sightings;
    out << j.dump() << '\n';
  }
}

} // namespace swarmwatch::analytics
