#include "swarmwatch/analytics.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace swarmwatch::analytics {

std::string Percent::str() const {
  const auto whole = hundredths / 100;
  const auto frac = hundredths % 100;
  return fmt::format("{}.{:02}", whole, frac);
}

Percent percent_of(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return {};
  // round(10000 * part / whole) with halves going up, in exact integers.
  __extension__ using u128 = unsigned __int128;
  const u128 scaled = (u128{part} * 20000U + whole) / (u128{whole} * 2U);
  return {static_cast<std::int64_t>(scaled)};
}

namespace {

void require_nonempty(const RegionHistogram& peers) {
  if (peers.total() == 0) throw AnalyticsError(Errc::empty_store, "analytics: the store holds no peers");
}

ParticipationRow make_row(std::string label, std::vector<std::uint32_t> ids, const RegionHistogram& peers) {
  ParticipationRow row;
  row.label = std::move(label);
  row.ids = std::move(ids);
  row.distinct_ips = peers.count(Membership::of(row.ids), SetMode::union_);
  row.overall = percent_of(row.distinct_ips, peers.total());
  return row;
}

} // namespace

ParticipationReport swarm_table(const TorrentRegistry& registry, const RegionHistogram& peers) {
  require_nonempty(peers);
  ParticipationReport report;
  report.global_distinct = peers.total();
  for (const auto& t : registry.torrents()) {
    const std::string label = t.name.empty() ? fmt::format("t_{}", t.id) : t.name;
    report.rows.push_back(make_row(label, {t.id}, peers));
  }
  return report;
}

ParticipationReport swarm_table(const PeerStore& store) { return swarm_table(store.registry(), store.histogram()); }

ParticipationReport episode_table(const TorrentRegistry& registry, const RegionHistogram& peers) {
  require_nonempty(peers);
  ParticipationReport report;
  report.global_distinct = peers.total();
  for (auto& [label, ids] : registry.episodes()) report.rows.push_back(make_row(label, ids, peers));
  return report;
}

ParticipationReport episode_table(const PeerStore& store) { return episode_table(store.registry(), store.histogram()); }

VennReport cross_participation(std::span<const Selector> selectors, const RegionHistogram& peers) {
  if (selectors.size() < 2 || selectors.size() > 3)
    throw AnalyticsError(Errc::selector_arity,
                         fmt::format("analytics: cross participation takes 2 or 3 selectors, got {}", selectors.size()));
  const std::size_t k = selectors.size();
  std::vector<Membership> masks;
  for (const auto& s : selectors) {
    if (s.ids.empty()) throw AnalyticsError(Errc::bad_selector, fmt::format("analytics: selector '{}' is empty", s.label));
    masks.push_back(Membership::of(s.ids));
  }

  std::vector<std::uint64_t> by_mask(std::size_t{1} << k, 0);
  for (const auto& [region, count] : peers.regions()) {
    unsigned mask = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (region.intersects(masks[i])) mask |= 1U << i;
    by_mask[mask] += count;
  }

  VennReport report;
  report.selectors.assign(selectors.begin(), selectors.end());
  report.set_sizes.assign(k, 0);
  for (unsigned mask = 1; mask < by_mask.size(); ++mask) {
    report.union_count += by_mask[mask];
    for (std::size_t i = 0; i < k; ++i)
      if ((mask >> i & 1U) != 0) report.set_sizes[i] += by_mask[mask];
  }
  for (unsigned mask = 1; mask < by_mask.size(); ++mask) {
    VennRegion region;
    region.mask = mask;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i & 1U) == 0) continue;
      if (!region.label.empty()) region.label += " & ";
      region.label += selectors[i].label;
    }
    region.count = by_mask[mask];
    region.share = percent_of(region.count, report.union_count);
    report.regions.push_back(std::move(region));
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      PairShare p;
      p.a = a;
      p.b = b;
      for (unsigned mask = 1; mask < by_mask.size(); ++mask) {
        const bool in_a = (mask >> a & 1U) != 0;
        const bool in_b = (mask >> b & 1U) != 0;
        if (in_a && in_b) p.intersection += by_mask[mask];
        if (in_a || in_b) p.union_count += by_mask[mask];
      }
      p.of_union = percent_of(p.intersection, p.union_count);
      p.of_first = percent_of(p.intersection, report.set_sizes[a]);
      p.of_second = percent_of(p.intersection, report.set_sizes[b]);
      report.pairs.push_back(p);
    }
  }
  return report;
}

VennReport cross_participation(std::span<const Selector> selectors, const PeerStore& store) {
  const auto registry = store.registry();
  for (const auto& s : selectors)
    for (auto id : s.ids)
      if (!registry.contains(id))
        throw AnalyticsError(Errc::bad_selector, fmt::format("analytics: torrent id {} is not registered", id));
  return cross_participation(selectors, store.histogram());
}

namespace {

std::optional<std::vector<std::uint32_t>> parse_id_list(std::string_view text) {
  std::vector<std::uint32_t> ids;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    std::uint32_t id = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), id);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) return std::nullopt;
    ids.push_back(id);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) return std::nullopt;
  }
  if (ids.empty()) return std::nullopt;
  return ids;
}

} // namespace

Selector resolve_selector(const TorrentRegistry& registry, std::string_view text) {
  Selector s;
  std::string_view spec = text;
  if (const auto eq = text.find('='); eq != std::string_view::npos) {
    s.label = std::string(text.substr(0, eq));
    spec = text.substr(eq + 1);
  } else {
    s.label = std::string(text);
  }
  if (auto ids = parse_id_list(spec)) {
    for (auto id : *ids)
      if (!registry.contains(id))
        throw AnalyticsError(Errc::bad_selector, fmt::format("analytics: torrent id {} is not registered", id));
    s.ids = std::move(*ids);
    return s;
  }
  auto ids = registry.resolve_label(spec);
  if (!ids) throw AnalyticsError(Errc::bad_selector, fmt::format("analytics: no torrent matches '{}'", spec));
  s.ids = std::move(*ids);
  return s;
}

} // namespace swarmwatch::analytics
