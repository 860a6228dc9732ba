#include "swarmwatch/analytics.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

namespace swarmwatch::analytics {

std::uint64_t series_value(const BucketCounts& c, Series s) {
  switch (s) {
  case Series::total: return c.total;
  case Series::europe: return c.europe;
  case Series::north_america: return c.north_america;
  case Series::australia: return c.australia;
  }
  return c.total;
}

std::optional<Series> parse_series(std::string_view text) {
  if (text == "total") return Series::total;
  if (text == "europe") return Series::europe;
  if (text == "north_america" || text == "na") return Series::north_america;
  if (text == "australia" || text == "aus") return Series::australia;
  return std::nullopt;
}

SwarmTimeSeries timeseries(std::span<const SnapshotRecord> records, std::optional<std::uint32_t> torrent_id,
                           std::optional<Window> window, Seconds width) {
  if (width <= Seconds{0}) throw AnalyticsError(Errc::empty_window, "analytics: bucket width must be positive");
  auto selected = [&](const SnapshotRecord& r) { return !torrent_id || r.torrent_id == *torrent_id; };

  if (!window) {
    bool any = false;
    Window w;
    for (const auto& r : records) {
      if (!selected(r)) continue;
      w.from = any ? std::min(w.from, r.time) : r.time;
      w.to = any ? std::max(w.to, r.time) : r.time;
      any = true;
    }
    if (!any) throw AnalyticsError(Errc::empty_window, "analytics: no crawl records to build a series from");
    w.to += width;
    window = w;
  }
  if (window->to <= window->from) throw AnalyticsError(Errc::empty_window, "analytics: window is empty");

  SwarmTimeSeries series;
  series.start = window->from;
  series.width = width;
  const auto span = window->to - window->from;
  const auto n = static_cast<std::size_t>((span + width - Seconds{1}) / width);

  // bucket -> torrent -> latest record in that bucket
  std::vector<std::map<std::uint32_t, const SnapshotRecord*>> latest(n);
  bool any = false;
  for (const auto& r : records) {
    if (!selected(r) || r.time < window->from || r.time >= window->to) continue;
    const auto i = static_cast<std::size_t>((r.time - window->from) / width);
    auto& slot = latest[i][r.torrent_id];
    if (slot == nullptr || slot->time <= r.time) slot = &r;
    any = true;
  }
  if (!any) throw AnalyticsError(Errc::empty_window, "analytics: no crawl records inside the window");

  series.buckets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (latest[i].empty()) continue;
    BucketCounts c;
    for (const auto& [id, r] : latest[i]) {
      c.total += r->peer_count;
      c.europe += r->euro_count;
      c.north_america += r->na_count;
      c.australia += r->aus_count;
    }
    series.buckets[i] = c;
  }
  return series;
}

SwarmTimeSeries timeseries(const PeerStore& store, std::optional<std::uint32_t> torrent_id,
                           std::optional<Window> window, Seconds width) {
  if (torrent_id && !store.registry().contains(*torrent_id))
    throw AnalyticsError(Errc::bad_selector, fmt::format("analytics: torrent id {} is not registered", *torrent_id));
  const auto records = store.snapshots();
  return timeseries(records, torrent_id, window, width);
}

} // namespace swarmwatch::analytics
